//! Concrete syntax: programs, expressions, certificates, domains and states.
//!
//! ```text
//! prog  := stmt
//! stmt  := atom (';' stmt)?
//! atom  := 'skip' | ident ':=' expr
//!        | 'if' '(' bexpr ')' block 'else' block
//!        | block '[' expr ']' block        probabilistic, left with the given probability
//!        | block '[' ']' block             demonic
//!        | 'while' '(' bexpr ')' block
//! block := '{' stmt '}'
//! ```

mod certificate;
mod domain;
mod grammar;
mod lexer;
mod printer;

pub use certificate::{
    parse_certificate, Certificate, CertificateNew, CertificateNonTerm, CertificateOld, RESERVED_VAR,
};
pub use domain::{parse_domain, parse_state, Domain, VarRange};
pub use printer::pretty_print;

use crate::syntax::{BExpr, Expr, Program, Rational};
use grammar::Parser;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{kind} is missing field `{field}`")]
    MissingField { kind: String, field: String },
    #[error("line {line}: field `{field}` does not belong to a {kind} certificate")]
    WrongKindField { line: usize, kind: String, field: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("empty range for `{var}`: {lo} > {hi}")]
    EmptyRange { var: String, lo: Rational, hi: Rational },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl ParseError {
    /// Re-anchors an error from a one-line sub-parse onto the enclosing file's line.
    fn at_line(self, line: usize) -> Self {
        match self {
            ParseError::Syntax { col, message, .. } => ParseError::Syntax { line, col, message },
            other => other,
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.program()
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_bexpr(text: &str) -> Result<BExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let b = p.bexpr()?;
    p.expect_eof()?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{CmpOp, Name};
    use crate::State;

    #[test]
    fn one_dimensional_walk() {
        let p = parse_program("while (x != 0) { {x := x-1} [1/2] {skip} }").unwrap();
        let Program::While(BExpr::Cmp(CmpOp::Ne, _, _), body) = &p else { panic!("{p:?}") };
        let Program::PChoice(a, prob, b) = &**body else { panic!() };
        assert!(matches!(**a, Program::Assign(..)));
        assert_eq!(prob, &Expr::lit(Rational::new(1, 2).unwrap()));
        assert_eq!(**b, Program::Skip);
    }

    #[test]
    fn demonic_body() {
        let p = parse_program("{x := x-1} [1/2] { {x := x+1} [] {skip} }").unwrap();
        let Program::PChoice(_, _, rest) = &p else { panic!() };
        let Program::DChoice(a, b) = &**rest else { panic!() };
        assert!(matches!(**a, Program::Assign(..)));
        assert_eq!(**b, Program::Skip);
    }

    #[test]
    fn syntax_errors() {
        let e = parse_program("skip skip").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 1, col: 6, .. }), "{e}");
        assert!(parse_program("while (x + 1) { skip }").is_err());
        assert!(parse_program("{skip} [x = 1] {skip}").is_err());
        assert!(parse_program("{skip} [true] {skip}").is_err());
        assert!(parse_program("if (x > 0) { skip }").is_err());
        assert!(parse_program("while := 1").is_err());
    }

    #[test]
    fn boolean_parentheses() {
        let b = parse_bexpr("(x + 1) * 2 > 0 & (y = 1 | !(y < 3))").unwrap();
        let s = State::from_pairs([("x", 0.into()), ("y", 5.into())]);
        assert!(b.eval(&s).unwrap());
        let s = State::from_pairs([("x", 0.into()), ("y", 2.into())]);
        assert!(!b.eval(&s).unwrap());
        let b = parse_bexpr("((x > 0))").unwrap();
        assert_eq!(b.free_vars().into_iter().collect::<Vec<_>>(), [Name::new("x")]);
    }

    #[test]
    fn round_trips() {
        for src in [
            "skip",
            "q := x / (2 * x + 1); { x := x - 1 } [q] { x := x + 1 }",
            "x := 1; while (x != 0) { { { x := x - 1 } [1/2] { x := x + 1 } } [1/n] { n := n + 1 } }",
            "while (x != 0) { { b := 0 } [1/n] { b := 1 }; while (b = 1) { n := n + 1; { b := 0 } [1/n] { b := 1 } }; { x := x - 1 } [1/2] { x := x + 1 } }",
            "if (!(x = 1) & is_int(x)) { x := -(1/2) * -x } else { x := --3 - -x }",
            "y := ite(x >= 1 | false, min(x, 2), iverson(!true)) + pow(2, -x) / 1/2",
        ] {
            let p = parse_program(src).unwrap();
            let printed = pretty_print(&p);
            assert_eq!(parse_program(&printed).unwrap(), p, "{printed}");
        }
        assert_eq!(pretty_print(&Program::Skip), "skip");
    }
}
