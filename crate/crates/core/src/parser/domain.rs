use std::fmt;

use num_traits::ToPrimitive;

use crate::syntax::{Name, Rational, State};

use super::ParseError;

/// One variable ranging over `lo, lo+step, ..., ` up to `hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarRange {
    pub name: Name,
    pub lo: Rational,
    pub hi: Rational,
    pub step: Rational,
    count: usize,
}

impl VarRange {
    pub fn new(name: &str, lo: Rational, hi: Rational, step: Rational) -> Result<Self, ParseError> {
        if !step.is_positive() {
            return Err(ParseError::InvalidDomain(format!("step for `{name}` must be positive")));
        }
        if lo > hi {
            return Err(ParseError::EmptyRange { var: name.to_string(), lo, hi });
        }
        let span = (&hi - &lo).checked_div(&step).expect("step is positive").floor();
        let count = span
            .to_bigint()
            .and_then(|n| n.to_usize())
            .and_then(|n| n.checked_add(1))
            .ok_or_else(|| ParseError::InvalidDomain(format!("range for `{name}` is too large")))?;
        Ok(VarRange { name: Name::new(name), lo, hi, step, count })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn value(&self, i: usize) -> Rational {
        &self.lo + &(&self.step * &Rational::from_integer(i as i64))
    }

    /// Position of `v` in the progression, if it lies on it.
    pub fn index_of(&self, v: &Rational) -> Option<usize> {
        if v < &self.lo || v > &self.hi {
            return None;
        }
        let k = (v - &self.lo).checked_div(&self.step)?;
        if !k.is_integer() {
            return None;
        }
        k.to_i64().map(|k| k as usize)
    }
}

/// A finite set of states: the cartesian product of per-variable progressions.
///
/// Enumeration order is lexicographic with the first listed variable varying
/// slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    vars: Vec<VarRange>,
    size: usize,
}

impl Domain {
    pub fn new(vars: Vec<VarRange>) -> Result<Self, ParseError> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(ParseError::InvalidDomain(format!("variable `{}` listed twice", v.name)));
            }
        }
        let size = vars
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.len()))
            .ok_or_else(|| ParseError::InvalidDomain("domain is too large".into()))?;
        Ok(Domain { vars, size })
    }

    /// Single integer range `name = lo..hi`.
    pub fn int_range(name: &str, lo: i64, hi: i64) -> Result<Self, ParseError> {
        Domain::new(vec![VarRange::new(name, lo.into(), hi.into(), Rational::one())?])
    }

    pub fn vars(&self) -> &[VarRange] {
        &self.vars
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v.name.as_str() == name)
    }

    /// The `i`-th state in enumeration order.
    pub fn state_at(&self, mut i: usize) -> State {
        let mut idx = vec![0; self.vars.len()];
        for (k, v) in self.vars.iter().enumerate().rev() {
            idx[k] = i % v.len();
            i /= v.len();
        }
        let mut s = State::new();
        for (v, &j) in self.vars.iter().zip(&idx) {
            s.set(v.name.clone(), v.value(j));
        }
        s
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.size).map(move |i| self.state_at(i))
    }

    /// Index of the state restricted to the domain's variables. Variables the
    /// domain does not mention are ignored; `None` if any domain variable is
    /// unbound or off its progression.
    pub fn index_of(&self, s: &State) -> Option<usize> {
        let mut idx = 0usize;
        for v in &self.vars {
            let val = s.lookup(v.name.as_str())?;
            idx = idx * v.len() + v.index_of(val)?;
        }
        Some(idx)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}..{}", v.name, v.lo, v.hi)?;
            if !v.step.is_one() {
                write!(f, ":{}", v.step)?;
            }
        }
        Ok(())
    }
}

fn parse_rational(text: &str, what: &str) -> Result<Rational, ParseError> {
    text.trim().parse().map_err(|_| ParseError::InvalidDomain(format!("invalid {what} `{}`", text.trim())))
}

/// Parses `x=0..200, n=1..50` or `x=0..10:1/2`.
pub fn parse_domain(text: &str) -> Result<Domain, ParseError> {
    let mut vars = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| ParseError::InvalidDomain(format!("expected `var=lo..hi`, got `{part}`")))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ParseError::InvalidDomain(format!("invalid variable name `{name}`")));
        }
        let (range, step) = match range.split_once(':') {
            Some((r, s)) => (r, parse_rational(s, "step")?),
            None => (range, Rational::one()),
        };
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| ParseError::InvalidDomain(format!("expected `lo..hi` for `{name}`")))?;
        vars.push(VarRange::new(name, parse_rational(lo, "bound")?, parse_rational(hi, "bound")?, step)?);
    }
    if vars.is_empty() {
        return Err(ParseError::InvalidDomain("empty domain".into()));
    }
    Domain::new(vars)
}

/// Parses `x=1, n=1/2` into a state.
pub fn parse_state(text: &str) -> Result<State, ParseError> {
    let mut s = State::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| ParseError::InvalidState(format!("expected `var=value`, got `{part}`")))?;
        let value: Rational =
            value.trim().parse().map_err(|_| ParseError::InvalidState(format!("invalid value `{}`", value.trim())))?;
        s.set(Name::new(name.trim()), value);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_domain("x=0..200").unwrap().size(), 201);
        assert_eq!(parse_domain("x=0..10:1/2").unwrap().size(), 21);
        assert_eq!(parse_domain("x=0..200, n=1..50").unwrap().size(), 201 * 50);
        assert!(matches!(parse_domain("x=5..1"), Err(ParseError::EmptyRange { .. })));
        assert!(parse_domain("x=0..1:0").is_err());
        assert!(parse_domain("x=0..1, x=2..3").is_err());
    }

    #[test]
    fn enumeration_and_index_agree() {
        let d = parse_domain("x=-2..2, n=1..3:1/2").unwrap();
        for (i, s) in d.states().enumerate() {
            assert_eq!(d.index_of(&s), Some(i));
        }
        assert_eq!(d.state_at(0).to_string(), "n=1,x=-2");
        let off = parse_state("x=0, n=5/4").unwrap();
        assert_eq!(d.index_of(&off), None);
        let extra = parse_state("x=0, n=1, q=7").unwrap();
        assert!(d.index_of(&extra).is_some());
    }
}
