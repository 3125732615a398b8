//! Expectation transformers: `wp` (demonic), `awp` (angelic, loop-free only)
//! and value iteration for loops.
//!
//! Loops are evaluated by bounded unfolding from the zero expectation, so
//! every value returned for a program with loops is a lower bound. The
//! `exact` flag of [`WpResult`] tells whether the bound was ever hit.

mod expectation;
mod iteration;
mod wp;

pub use expectation::{Expectation, Table};
pub use iteration::{loop_value_iteration, loop_value_iteration_with, IterOptions, Precision};
pub use wp::Choice;

use std::fmt;
use std::num::NonZeroU32;

use crate::syntax::{EvalError, Expr, Program, Rational, State};
use wp::Evaluator;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("probability {prob} outside [0, 1] at state {state}")]
    ProbabilityOutOfRange { prob: Rational, state: State },
    #[error("expectation is negative ({value}) at state {state}")]
    NegativeExpectation { value: Rational, state: State },
    #[error("awp is only defined for loop-free programs")]
    LoopNotAllowed,
}

/// Maximum number of body executions explored per activation of a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fuel(NonZeroU32);

impl Fuel {
    pub const DEFAULT: Fuel = Fuel(NonZeroU32::new(64).unwrap());

    pub fn new(n: u32) -> Option<Self> {
        NonZeroU32::new(n).map(Fuel)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WpResult {
    pub value: Rational,
    /// False when some loop ran out of fuel on a contributing path, in which
    /// case `value` is only a lower bound.
    pub exact: bool,
}

impl fmt::Display for WpResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.exact { "exact" } else { "lower bound" };
        write!(f, "{} ({tag})", self.value)
    }
}

/// Weakest pre-expectation of `post` through `prog` at `s`, demonic choice
/// taken as the minimum.
pub fn wp_eval(prog: &Program, post: &Expectation, s: &State, fuel: Fuel) -> Result<WpResult, TransformError> {
    let f = |t: &State| post.eval(t);
    let (value, exact) = Evaluator::new(Choice::Demonic, fuel).run(prog, &f, s)?;
    Ok(WpResult { value, exact })
}

/// Angelic pre-expectation: demonic choice taken as the maximum.
pub fn awp_eval(prog: &Program, post: &Expectation, s: &State) -> Result<Rational, TransformError> {
    if !prog.is_loop_free() {
        return Err(TransformError::LoopNotAllowed);
    }
    let f = |t: &State| post.eval(t);
    let (value, _) = Evaluator::new(Choice::Angelic, Fuel::DEFAULT).run(prog, &f, s)?;
    Ok(value)
}

/// Expected value of an arbitrary (possibly negative) expression after the
/// loop-free `prog`, with demonic choice resolved by `choice`.
pub fn expected_value(prog: &Program, e: &Expr, s: &State, choice: Choice) -> Result<Rational, TransformError> {
    if !prog.is_loop_free() {
        return Err(TransformError::LoopNotAllowed);
    }
    let f = |t: &State| Ok(e.eval(t)?);
    let (value, _) = Evaluator::new(choice, Fuel::DEFAULT).run(prog, &f, s)?;
    Ok(value)
}

/// Truncated subtraction `max(a - b, 0)`.
pub fn monus(a: &Rational, b: &Rational) -> Rational {
    a.monus(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_domain, parse_expr, parse_program};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn post(s: &str) -> Expectation {
        Expectation::Expr(parse_expr(s).unwrap())
    }

    fn st(x: i64) -> State {
        State::from_pairs([("x", x.into())])
    }

    #[test]
    fn demonic_and_angelic_choice() {
        let p = parse_program("{x := x+1} [] {skip}").unwrap();
        let w = wp_eval(&p, &post("x"), &st(3), Fuel::DEFAULT).unwrap();
        assert_eq!(w, WpResult { value: r("3"), exact: true });
        assert_eq!(awp_eval(&p, &post("x"), &st(3)).unwrap(), r("4"));
    }

    #[test]
    fn additivity_failure() {
        let p = parse_program("{ {x:=1}[1/3]{x:=0} } [] { {x:=0}[1/3]{x:=1} }").unwrap();
        for x in [0, 5] {
            let one = wp_eval(&p, &post("iverson(x=1)"), &st(x), Fuel::DEFAULT).unwrap();
            let zero = wp_eval(&p, &post("iverson(x=0)"), &st(x), Fuel::DEFAULT).unwrap();
            let both = wp_eval(&p, &post("iverson(x=1)+iverson(x=0)"), &st(x), Fuel::DEFAULT).unwrap();
            assert_eq!((one.value, zero.value, both.value), (r("1/3"), r("1/3"), r("1")));
        }
    }

    #[test]
    fn geometric_loop_fuel() {
        let p = parse_program("while (x != 0) { {x := 0} [1/2] {skip} }").unwrap();
        let w = wp_eval(&p, &Expectation::one(), &st(1), Fuel::new(10).unwrap()).unwrap();
        assert_eq!(w, WpResult { value: r("1023/1024"), exact: false });
        let done = wp_eval(&p, &Expectation::one(), &st(0), Fuel::new(1).unwrap()).unwrap();
        assert!(done.exact);
    }

    #[test]
    fn angelic_walk_body() {
        let p = parse_program("{x := x-1} [1/2] { {x := x+1} [] {skip} }").unwrap();
        assert_eq!(awp_eval(&p, &post("x"), &st(5)).unwrap(), r("5"));
        let lp = parse_program("while (x > 0) { x := x - 1 }").unwrap();
        assert_eq!(awp_eval(&lp, &post("x"), &st(1)), Err(TransformError::LoopNotAllowed));
    }

    #[test]
    fn errors() {
        let p = parse_program("{skip} [x] {skip}").unwrap();
        assert!(matches!(
            wp_eval(&p, &Expectation::one(), &st(2), Fuel::DEFAULT),
            Err(TransformError::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            wp_eval(&Program::Skip, &post("x"), &st(-1), Fuel::DEFAULT),
            Err(TransformError::NegativeExpectation { .. })
        ));
        assert_eq!(
            expected_value(&Program::Skip, &parse_expr("-x").unwrap(), &st(2), Choice::Demonic).unwrap(),
            r("-2")
        );
    }

    #[test]
    fn bounded_submartingale_loop_value_iteration() {
        let p = parse_program("while (x != 0) { if (x = 1) { {x := 0} [1/2] {x := 2} } else { x := 2 } }").unwrap();
        let Program::While(g, body) = &p else { unreachable!() };
        let dom = parse_domain("x=0..10").unwrap();
        for iters in [0, 1, 2, 3, 50] {
            let t = loop_value_iteration(g, body, &Expectation::one(), &dom, iters, Fuel::DEFAULT).unwrap();
            let expect = if iters >= 1 { r("1/2") } else { Rational::zero() };
            assert_eq!(t.get(&st(1)), expect, "iters = {iters}");
        }
    }

    #[test]
    fn geometric_value_iteration() {
        let p = parse_program("while (x != 0) { {x := 0} [1/2] {skip} }").unwrap();
        let Program::While(g, body) = &p else { unreachable!() };
        let dom = parse_domain("x=0..1").unwrap();
        let t = loop_value_iteration(g, body, &Expectation::one(), &dom, 10, Fuel::DEFAULT).unwrap();
        assert_eq!(t.get(&st(1)), r("1023/1024"));
        // Agrees with the fueled evaluator unfolding the same number of times.
        let w = wp_eval(&p, &Expectation::one(), &st(1), Fuel::new(10).unwrap()).unwrap();
        assert_eq!(w.value, t.get(&st(1)));
        let t = loop_value_iteration(g, body, &Expectation::one(), &dom, 0, Fuel::DEFAULT).unwrap();
        assert_eq!((t.get(&st(0)), t.get(&st(1))), (Rational::one(), Rational::zero()));
    }
}

#[cfg(test)]
mod slow_tests {
    use super::*;
    use crate::parser::{parse_domain, parse_program};

    #[test]
    fn biased_walk_approaches_half() {
        let p = parse_program("while (x > 0) { {x := x-1} [1/3] {x := x+1} }").unwrap();
        let Program::While(g, body) = &p else { unreachable!() };
        let dom = parse_domain("x=0..200").unwrap();
        let t = loop_value_iteration(g, body, &Expectation::one(), &dom, 10_000, Fuel::DEFAULT).unwrap();
        let v = t.get(&State::from_pairs([("x", 1.into())]));
        assert!(v <= "1/2".parse().unwrap() && v >= "0.495".parse().unwrap());
    }
}
