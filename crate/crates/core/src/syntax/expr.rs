use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{EvalError, Rational, State};

/// A program variable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Monus,
    Pow,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Min => "min",
            BinOp::Max => "max",
            BinOp::Monus => "monus",
            BinOp::Pow => "pow",
            BinOp::Mod => "mod",
        }
    }

    fn is_infix(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Abs,
    Harmonic,
    Floor,
    Ceil,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Abs => "abs",
            UnaryFn::Harmonic => "harmonic",
            UnaryFn::Floor => "floor",
            UnaryFn::Ceil => "ceil",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    #[inline]
    pub fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }
}

/// Arithmetic expression over program variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Rational),
    Var(Name),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnaryFn, Box<Expr>),
    Ite(Box<BExpr>, Box<Expr>, Box<Expr>),
    Iverson(Box<BExpr>),
}

/// Boolean expression (guards, invariants).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BExpr {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
    IsInt(Expr),
}

/// Harmonic numbers above this index are refused rather than computed.
pub const HARMONIC_LIMIT: i64 = 1_000_000;
/// Largest exponent magnitude accepted by `pow`.
pub const POW_LIMIT: i64 = 1 << 20;

thread_local! {
    static HARMONIC: RefCell<Vec<Rational>> = RefCell::new(vec![Rational::zero()]);
}

/// `H_n = 1 + 1/2 + ... + 1/n`, memoised per thread.
pub fn harmonic(n: usize) -> Rational {
    HARMONIC.with(|cache| {
        let mut cache = cache.borrow_mut();
        while cache.len() <= n {
            let k = cache.len() as i64;
            let next = &cache[cache.len() - 1] + &Rational::new(1, k).unwrap();
            cache.push(next);
        }
        cache[n].clone()
    })
}

fn integer_arg(v: &Rational, func: &'static str) -> Result<i64, EvalError> {
    if !v.is_integer() {
        return Err(EvalError::NonIntegerArgument { func, value: v.clone() });
    }
    v.to_i64().ok_or(EvalError::ArgumentTooLarge { func, value: v.clone() })
}

pub(crate) fn apply_binary(op: BinOp, a: Rational, b: Rational) -> Result<Rational, EvalError> {
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a.checked_div(&b).ok_or(EvalError::DivisionByZero)?,
        BinOp::Min => a.min(b),
        BinOp::Max => a.max(b),
        BinOp::Monus => a.monus(&b),
        BinOp::Pow => {
            let e = integer_arg(&b, "pow")?;
            if !a.is_integer() {
                return Err(EvalError::NonIntegerArgument { func: "pow", value: a });
            }
            if e.abs() > POW_LIMIT {
                return Err(EvalError::ArgumentTooLarge { func: "pow", value: b });
            }
            a.pow(e).ok_or(EvalError::DivisionByZero)?
        }
        BinOp::Mod => {
            if !a.is_integer() {
                return Err(EvalError::NonIntegerArgument { func: "mod", value: a });
            }
            if !b.is_integer() {
                return Err(EvalError::NonIntegerArgument { func: "mod", value: b });
            }
            a.rem_euclid(&b).ok_or(EvalError::DivisionByZero)?
        }
    })
}

pub(crate) fn apply_unary(f: UnaryFn, a: Rational) -> Result<Rational, EvalError> {
    Ok(match f {
        UnaryFn::Abs => a.abs(),
        UnaryFn::Floor => a.floor(),
        UnaryFn::Ceil => a.ceil(),
        UnaryFn::Harmonic => {
            let n = integer_arg(&a, "harmonic")?;
            if n < 0 {
                return Err(EvalError::NegativeArgument { func: "harmonic", value: a });
            }
            if n > HARMONIC_LIMIT {
                return Err(EvalError::ArgumentTooLarge { func: "harmonic", value: a });
            }
            harmonic(n as usize)
        }
    })
}

impl Expr {
    pub fn lit(r: Rational) -> Self {
        Expr::Lit(r)
    }

    pub fn int(n: i64) -> Self {
        Expr::Lit(Rational::from_integer(n))
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(Name::new(name))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn unary(f: UnaryFn, a: Expr) -> Self {
        Expr::Unary(f, Box::new(a))
    }

    pub fn iverson(b: BExpr) -> Self {
        Expr::Iverson(Box::new(b))
    }

    pub fn ite(c: BExpr, t: Expr, e: Expr) -> Self {
        Expr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn eval(&self, state: &State) -> Result<Rational, EvalError> {
        match self {
            Expr::Lit(r) => Ok(r.clone()),
            Expr::Var(n) => state.get(n).cloned(),
            Expr::Neg(e) => Ok(-e.eval(state)?),
            Expr::Binary(op, a, b) => apply_binary(*op, a.eval(state)?, b.eval(state)?),
            Expr::Unary(f, a) => apply_unary(*f, a.eval(state)?),
            Expr::Ite(c, t, e) => {
                if c.eval(state)? {
                    t.eval(state)
                } else {
                    e.eval(state)
                }
            }
            Expr::Iverson(b) => Ok(if b.eval(state)? { Rational::one() } else { Rational::zero() }),
        }
    }

    /// Replaces every occurrence of `var` by `by`. Expressions have no
    /// binders, so replacement is trivially capture-free.
    pub fn substitute(&self, var: &Name, by: &Expr) -> Expr {
        match self {
            Expr::Lit(_) => self.clone(),
            Expr::Var(n) if n == var => by.clone(),
            Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(var, by))),
            Expr::Binary(op, a, b) => Expr::bin(*op, a.substitute(var, by), b.substitute(var, by)),
            Expr::Unary(f, a) => Expr::unary(*f, a.substitute(var, by)),
            Expr::Ite(c, t, e) => Expr::ite(c.substitute(var, by), t.substitute(var, by), e.substitute(var, by)),
            Expr::Iverson(b) => Expr::iverson(b.substitute(var, by)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Neg(e) | Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Ite(c, t, e) => {
                c.collect_vars(out);
                t.collect_vars(out);
                e.collect_vars(out);
            }
            Expr::Iverson(b) => b.collect_vars(out),
        }
    }
}

impl BExpr {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        BExpr::Cmp(op, a, b)
    }

    pub fn and(a: BExpr, b: BExpr) -> Self {
        BExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BExpr, b: BExpr) -> Self {
        BExpr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: BExpr) -> Self {
        BExpr::Not(Box::new(a))
    }

    pub fn eval(&self, state: &State) -> Result<bool, EvalError> {
        match self {
            BExpr::True => Ok(true),
            BExpr::False => Ok(false),
            BExpr::Cmp(op, a, b) => Ok(op.holds(&a.eval(state)?, &b.eval(state)?)),
            BExpr::Not(b) => Ok(!b.eval(state)?),
            BExpr::And(a, b) => Ok(a.eval(state)? && b.eval(state)?),
            BExpr::Or(a, b) => Ok(a.eval(state)? || b.eval(state)?),
            BExpr::IsInt(e) => Ok(e.eval(state)?.is_integer()),
        }
    }

    pub fn substitute(&self, var: &Name, by: &Expr) -> BExpr {
        match self {
            BExpr::True | BExpr::False => self.clone(),
            BExpr::Cmp(op, a, b) => BExpr::Cmp(*op, a.substitute(var, by), b.substitute(var, by)),
            BExpr::Not(b) => BExpr::not(b.substitute(var, by)),
            BExpr::And(a, b) => BExpr::and(a.substitute(var, by), b.substitute(var, by)),
            BExpr::Or(a, b) => BExpr::or(a.substitute(var, by), b.substitute(var, by)),
            BExpr::IsInt(e) => BExpr::IsInt(e.substitute(var, by)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            BExpr::True | BExpr::False => {}
            BExpr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BExpr::Not(b) => b.collect_vars(out),
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BExpr::IsInt(e) => e.collect_vars(out),
        }
    }
}

// Printing. Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 atoms.

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Lit(r) if r.is_negative() || !r.is_integer() => 3,
        _ => 4,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    let prec = expr_prec(e);
    let paren = prec < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match e {
        // A fraction literal is a single token `a/b`; a negative literal is `-` glued to it.
        Expr::Lit(r) => write!(f, "{r}")?,
        Expr::Var(n) => write!(f, "{n}")?,
        Expr::Neg(inner) => {
            f.write_str("-")?;
            // `-` directly followed by a number would lex as a negative literal.
            let needs_paren = matches!(**inner, Expr::Lit(_));
            if needs_paren {
                f.write_str("(")?;
                write_expr(f, inner, 0)?;
                f.write_str(")")?;
            } else {
                write_expr(f, inner, 3)?;
            }
        }
        Expr::Binary(op, a, b) if op.is_infix() => {
            write_expr(f, a, prec)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, b, prec + 1)?;
        }
        Expr::Binary(op, a, b) => {
            write!(f, "{}(", op.symbol())?;
            write_expr(f, a, 0)?;
            f.write_str(", ")?;
            write_expr(f, b, 0)?;
            f.write_str(")")?;
        }
        Expr::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0)?;
            f.write_str(")")?;
        }
        Expr::Ite(c, t, e) => write!(f, "ite({c}, {t}, {e})")?,
        Expr::Iverson(b) => write!(f, "iverson({b})")?,
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

// Boolean precedence: 1 or, 2 and, 3 not/atoms.
fn bexpr_prec(b: &BExpr) -> u8 {
    match b {
        BExpr::Or(..) => 1,
        BExpr::And(..) => 2,
        _ => 3,
    }
}

fn write_bexpr(f: &mut fmt::Formatter<'_>, b: &BExpr, min_prec: u8) -> fmt::Result {
    let prec = bexpr_prec(b);
    let paren = prec < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match b {
        BExpr::True => f.write_str("true")?,
        BExpr::False => f.write_str("false")?,
        BExpr::Cmp(op, a, c) => write!(f, "{a} {} {c}", op.symbol())?,
        BExpr::Not(inner) => {
            f.write_str("!")?;
            // `!` binds to a boolean atom; comparisons need explicit parentheses.
            let needs_paren = !matches!(**inner, BExpr::True | BExpr::False | BExpr::IsInt(_) | BExpr::Not(_));
            if needs_paren {
                f.write_str("(")?;
                write_bexpr(f, inner, 0)?;
                f.write_str(")")?;
            } else {
                write_bexpr(f, inner, 3)?;
            }
        }
        BExpr::And(a, c) => {
            write_bexpr(f, a, 2)?;
            f.write_str(" & ")?;
            write_bexpr(f, c, 3)?;
        }
        BExpr::Or(a, c) => {
            write_bexpr(f, a, 1)?;
            f.write_str(" | ")?;
            write_bexpr(f, c, 2)?;
        }
        BExpr::IsInt(e) => write!(f, "is_int({e})")?,
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bexpr(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn harmonic_values() {
        let h3 = Expr::unary(UnaryFn::Harmonic, Expr::int(3));
        assert_eq!(h3.eval(&State::new()).unwrap(), r("11/6"));
        assert_eq!(harmonic(0), Rational::zero());
        let bad = Expr::unary(UnaryFn::Harmonic, Expr::int(-1));
        assert!(matches!(bad.eval(&State::new()), Err(EvalError::NegativeArgument { .. })));
        let frac = Expr::unary(UnaryFn::Harmonic, Expr::lit(r("1/2")));
        assert!(matches!(frac.eval(&State::new()), Err(EvalError::NonIntegerArgument { .. })));
    }

    #[test]
    fn monus_expression() {
        let e = Expr::bin(BinOp::Monus, Expr::int(5), Expr::int(7));
        assert_eq!(e.eval(&State::new()).unwrap(), Rational::zero());
    }

    #[test]
    fn biased_walk_martingale_form() {
        // (pow(2,x) - 1) / pow(2, x-1) at x = 2
        let two = Expr::int(2);
        let x = Expr::var("x");
        let num = Expr::bin(BinOp::Sub, Expr::bin(BinOp::Pow, two.clone(), x.clone()), Expr::int(1));
        let den = Expr::bin(BinOp::Pow, two, Expr::bin(BinOp::Sub, x, Expr::int(1)));
        let e = Expr::bin(BinOp::Div, num, den);
        let s = State::from_pairs([("x", Rational::from_integer(2))]);
        assert_eq!(e.eval(&s).unwrap(), r("3/2"));
        let s0 = State::from_pairs([("x", Rational::zero())]);
        assert_eq!(e.eval(&s0).unwrap(), Rational::zero());
    }

    #[test]
    fn unbound_and_division_errors() {
        assert!(matches!(Expr::var("y").eval(&State::new()), Err(EvalError::UnboundVariable(_))));
        let d = Expr::bin(BinOp::Div, Expr::int(1), Expr::int(0));
        assert_eq!(d.eval(&State::new()), Err(EvalError::DivisionByZero));
        let m = Expr::bin(BinOp::Mod, Expr::int(1), Expr::int(0));
        assert_eq!(m.eval(&State::new()), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn boolean_semantics() {
        let x = Expr::var("x");
        let nat = BExpr::and(BExpr::IsInt(x.clone()), BExpr::cmp(CmpOp::Ge, x.clone(), Expr::int(0)));
        assert!(nat.eval(&State::from_pairs([("x", r("3"))])).unwrap());
        assert!(!BExpr::IsInt(x.clone()).eval(&State::from_pairs([("x", r("1/2"))])).unwrap());
        let ne = BExpr::cmp(CmpOp::Ne, x, Expr::int(0));
        assert!(!ne.eval(&State::from_pairs([("x", r("0"))])).unwrap());
    }

    #[test]
    fn substitution_examples() {
        let x = Name::new("x");
        let f = Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1));
        let g = f.substitute(&x, &Expr::bin(BinOp::Sub, Expr::var("x"), Expr::int(1)));
        for v in -3..4 {
            let s = State::from_pairs([("x", Rational::from_integer(v))]);
            assert_eq!(g.eval(&s).unwrap(), Rational::from_integer(v));
        }
        let a = Expr::unary(UnaryFn::Abs, Expr::var("x")).substitute(&x, &Expr::int(0));
        assert_eq!(a, Expr::unary(UnaryFn::Abs, Expr::int(0)));
        let h = Expr::unary(UnaryFn::Harmonic, Expr::var("x"))
            .substitute(&x, &Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1)));
        assert_eq!(h.to_string(), "harmonic(x + 1)");
    }

    #[test]
    fn printing_precedence() {
        let e = Expr::bin(
            BinOp::Mul,
            Expr::bin(BinOp::Sub, Expr::var("a"), Expr::var("b")),
            Expr::Neg(Box::new(Expr::lit(r("1/2")))),
        );
        assert_eq!(e.to_string(), "(a - b) * -(1/2)");
        let sub = Expr::bin(BinOp::Sub, Expr::var("a"), Expr::bin(BinOp::Sub, Expr::var("b"), Expr::var("c")));
        assert_eq!(sub.to_string(), "a - (b - c)");
    }
}
