use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{BExpr, Expr, Rational};

use super::{parse_bexpr, parse_expr, ParseError};

/// Name of the argument of `prob` and `decrease`: the current variant value.
pub const RESERVED_VAR: &str = "v";

/// Quasi-variant certificate: invariant `I`, variant `V`, progress
/// probability `p(v)` and decrease `d(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateNew {
    pub invariant: BExpr,
    pub variant: Expr,
    pub prob: Expr,
    pub decrease: Expr,
}

/// Bounded integer variant certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateOld {
    pub invariant: BExpr,
    pub vint: Expr,
    pub low: Rational,
    pub high: Rational,
    pub eps: Rational,
}

/// Bounded, non-constant exact martingale witnessing non-termination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateNonTerm {
    pub invariant: BExpr,
    pub martingale: Expr,
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    New(CertificateNew),
    Old(CertificateOld),
    NonTerm(CertificateNonTerm),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::New(_) => "ast-new",
            Certificate::Old(_) => "ast-old",
            Certificate::NonTerm(_) => "non-termination",
        }
    }

    pub fn invariant(&self) -> &BExpr {
        match self {
            Certificate::New(c) => &c.invariant,
            Certificate::Old(c) => &c.invariant,
            Certificate::NonTerm(c) => &c.invariant,
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind = {}", self.kind())?;
        writeln!(f, "invariant = {}", self.invariant())?;
        match self {
            Certificate::New(c) => {
                writeln!(f, "variant = {}", c.variant)?;
                writeln!(f, "prob = {}", c.prob)?;
                writeln!(f, "decrease = {}", c.decrease)
            }
            Certificate::Old(c) => {
                writeln!(f, "vint = {}", c.vint)?;
                writeln!(f, "low = {}", c.low)?;
                writeln!(f, "high = {}", c.high)?;
                writeln!(f, "eps = {}", c.eps)
            }
            Certificate::NonTerm(c) => {
                writeln!(f, "martingale = {}", c.martingale)?;
                writeln!(f, "bound = {}", c.bound)
            }
        }
    }
}

const FIELDS_NEW: &[&str] = &["invariant", "variant", "prob", "decrease"];
const FIELDS_OLD: &[&str] = &["invariant", "vint", "low", "high", "eps"];
const FIELDS_NONTERM: &[&str] = &["invariant", "martingale", "bound"];
const ALL_FIELDS: &[&str] =
    &["invariant", "variant", "prob", "decrease", "vint", "low", "high", "eps", "martingale", "bound"];

struct Fields {
    kind: String,
    map: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Result<(usize, String), ParseError> {
        self.map.remove(key).ok_or_else(|| ParseError::MissingField { kind: self.kind.clone(), field: key.to_string() })
    }

    fn expr(&mut self, key: &str) -> Result<Expr, ParseError> {
        let (line, text) = self.take(key)?;
        parse_expr(&text).map_err(|e| e.at_line(line))
    }

    fn bexpr(&mut self, key: &str) -> Result<BExpr, ParseError> {
        let (line, text) = self.take(key)?;
        parse_bexpr(&text).map_err(|e| e.at_line(line))
    }

    fn rational(&mut self, key: &str) -> Result<Rational, ParseError> {
        let (line, text) = self.take(key)?;
        text.parse().map_err(|_| ParseError::Syntax {
            line,
            col: 1,
            message: format!("`{key}` must be a rational constant, got `{text}`"),
        })
    }
}

fn invalid(msg: impl Into<String>) -> ParseError {
    ParseError::InvalidCertificate(msg.into())
}

fn only_v(key: &str, e: &Expr) -> Result<(), ParseError> {
    match e.free_vars().into_iter().find(|n| n.as_str() != RESERVED_VAR) {
        Some(n) => Err(invalid(format!("`{key}` may only mention `{RESERVED_VAR}`, found `{n}`"))),
        None => Ok(()),
    }
}

fn no_v(key: &str, vars: impl IntoIterator<Item = crate::Name>) -> Result<(), ParseError> {
    if vars.into_iter().any(|n| n.as_str() == RESERVED_VAR) {
        return Err(invalid(format!("`{key}` may not mention the reserved name `{RESERVED_VAR}`")));
    }
    Ok(())
}

/// Parses the line-oriented `key = value` certificate format. `#` starts a
/// comment; blank lines are ignored.
pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    let mut kind = None;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ParseError::Syntax { line, col: 1, message: "expected `key = value`".into() });
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "kind" {
            if kind.is_some() {
                return Err(ParseError::Syntax { line, col: 1, message: "duplicate `kind`".into() });
            }
            kind = Some(value.to_string());
            continue;
        }
        if !ALL_FIELDS.contains(&key) {
            return Err(ParseError::UnknownKey { line, key: key.to_string() });
        }
        if map.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(ParseError::Syntax { line, col: 1, message: format!("duplicate `{key}`") });
        }
    }
    let kind = kind.ok_or_else(|| ParseError::MissingField { kind: "certificate".into(), field: "kind".into() })?;
    let allowed = match kind.as_str() {
        "ast-new" => FIELDS_NEW,
        "ast-old" => FIELDS_OLD,
        "non-termination" => FIELDS_NONTERM,
        other => return Err(invalid(format!("unknown certificate kind `{other}`"))),
    };
    if let Some((key, (line, _))) = map.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(ParseError::WrongKindField { line: *line, kind, field: key.clone() });
    }
    let mut f = Fields { kind, map };
    let invariant = f.bexpr("invariant")?;
    no_v("invariant", invariant.free_vars())?;
    let cert = match f.kind.as_str() {
        "ast-new" => {
            let variant = f.expr("variant")?;
            no_v("variant", variant.free_vars())?;
            let prob = f.expr("prob")?;
            only_v("prob", &prob)?;
            let decrease = f.expr("decrease")?;
            only_v("decrease", &decrease)?;
            Certificate::New(CertificateNew { invariant, variant, prob, decrease })
        }
        "ast-old" => {
            let vint = f.expr("vint")?;
            no_v("vint", vint.free_vars())?;
            let low = f.rational("low")?;
            let high = f.rational("high")?;
            let eps = f.rational("eps")?;
            if !low.is_integer() || !high.is_integer() {
                return Err(invalid("`low` and `high` must be integers"));
            }
            if low >= high {
                return Err(invalid(format!("`low` ({low}) must be below `high` ({high})")));
            }
            if !eps.is_positive() || eps > Rational::one() {
                return Err(invalid(format!("`eps` must lie in (0, 1], got {eps}")));
            }
            Certificate::Old(CertificateOld { invariant, vint, low, high, eps })
        }
        _ => {
            let martingale = f.expr("martingale")?;
            no_v("martingale", martingale.free_vars())?;
            let bound = f.rational("bound")?;
            if !bound.is_positive() {
                return Err(invalid(format!("`bound` must be positive, got {bound}")));
            }
            Certificate::NonTerm(CertificateNonTerm { invariant, martingale, bound })
        }
    };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_kinds() {
        let c = parse_certificate(
            "kind = ast-new\ninvariant = is_int(x) & x >= 0\nvariant = abs(x)\nprob = 1/2\ndecrease = 1",
        )
        .unwrap();
        assert!(matches!(c, Certificate::New(_)));
        let c = parse_certificate(
            "kind = ast-old\ninvariant = is_int(x) & x>=0 & x<=2\nvint = x\nlow = 0\nhigh = 2\neps = 1/2",
        )
        .unwrap();
        assert!(matches!(c, Certificate::Old(_)));
        let c = parse_certificate(
            "kind = non-termination\ninvariant = is_int(x) & x>=0\nmartingale = (pow(2,x)-1)/pow(2,x-1)\nbound = 2",
        )
        .unwrap();
        assert!(matches!(c, Certificate::NonTerm(_)));
    }

    #[test]
    fn rejects_bad_certificates() {
        let base = "kind = ast-old\ninvariant = true\nvint = x\nlow = 0\nhigh = 2\n";
        assert!(matches!(parse_certificate(&format!("{base}eps = 0")), Err(ParseError::InvalidCertificate(_))));
        assert!(matches!(parse_certificate(base), Err(ParseError::MissingField { .. })));
        assert!(matches!(
            parse_certificate(&format!("{base}eps = 1\nprob = 1")),
            Err(ParseError::WrongKindField { .. })
        ));
        assert!(matches!(
            parse_certificate(&format!("{base}eps = 1\ncolour = red")),
            Err(ParseError::UnknownKey { line: 7, .. })
        ));
        let leaky = "kind = ast-new\ninvariant = true\nvariant = x\nprob = 1/x\ndecrease = 1";
        assert!(matches!(parse_certificate(leaky), Err(ParseError::InvalidCertificate(_))));
        assert!(parse_certificate("invariant = true").is_err());
    }

    #[test]
    fn display_reparses() {
        let src = "kind = ast-new\ninvariant = true # comment\nvariant = harmonic(x)\nprob = 1/3\ndecrease = pow(3, -ceil(v))";
        let c = parse_certificate(src).unwrap();
        assert_eq!(parse_certificate(&c.to_string()).unwrap(), c);
    }
}
