use std::cell::RefCell;
use std::collections::HashMap;

use crate::syntax::{BExpr, Program, Rational, State};

use super::{Fuel, TransformError};

type Value = (Rational, bool);
type Res<T> = Result<T, TransformError>;

/// How demonic choice is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    /// `wp`: the minimum of both branches.
    Demonic,
    /// `awp`: the maximum.
    Angelic,
}

/// What remains to be done after the current statement.
enum Cont<'a> {
    Post(&'a dyn Fn(&State) -> Res<Rational>),
    Seq(&'a [Program], &'a Cont<'a>),
    Loop(&'a LoopFrame<'a>, u32),
}

/// One activation of a `while` statement. Its memo is keyed by remaining
/// unfoldings and state, which keeps revisits of the same state polynomial.
struct LoopFrame<'a> {
    guard: &'a BExpr,
    body: &'a Program,
    after: &'a Cont<'a>,
    memo: RefCell<HashMap<(u32, State), Value>>,
}

pub(crate) struct Evaluator {
    pub choice: Choice,
    pub fuel: u32,
}

impl Evaluator {
    pub(crate) fn new(choice: Choice, fuel: Fuel) -> Self {
        Evaluator { choice, fuel: fuel.get() }
    }

    /// Value of `prog` followed by `post` at `s`, and whether it is exact
    /// (no loop ran out of unfoldings on a path that contributes).
    pub(crate) fn run(&self, prog: &Program, post: &dyn Fn(&State) -> Res<Rational>, s: &State) -> Res<Value> {
        self.wp(prog, &Cont::Post(post), s)
    }

    fn wp(&self, prog: &Program, k: &Cont<'_>, s: &State) -> Res<Value> {
        match prog {
            Program::Skip => self.apply(k, s),
            Program::Assign(x, e) => {
                let v = e.eval(s)?;
                self.apply(k, &s.with(x, v))
            }
            Program::Seq(ps) => self.wp(&ps[0], &Cont::Seq(&ps[1..], k), s),
            Program::If(g, a, b) => {
                if g.eval(s)? {
                    self.wp(a, k, s)
                } else {
                    self.wp(b, k, s)
                }
            }
            Program::PChoice(a, pe, b) => {
                let p = pe.eval(s)?;
                if p.is_negative() || p > Rational::one() {
                    return Err(TransformError::ProbabilityOutOfRange { prob: p, state: s.clone() });
                }
                if p.is_one() {
                    return self.wp(a, k, s);
                }
                if p.is_zero() {
                    return self.wp(b, k, s);
                }
                let (va, ea) = self.wp(a, k, s)?;
                let (vb, eb) = self.wp(b, k, s)?;
                let q = &Rational::one() - &p;
                Ok((&(&p * &va) + &(&q * &vb), ea && eb))
            }
            Program::DChoice(a, b) => {
                let (va, ea) = self.wp(a, k, s)?;
                let (vb, eb) = self.wp(b, k, s)?;
                Ok(match self.choice {
                    // A lower bound on the losing branch that already exceeds an
                    // exact winner cannot change the minimum.
                    Choice::Demonic => {
                        if va <= vb {
                            (va, ea)
                        } else {
                            (vb, eb)
                        }
                    }
                    Choice::Angelic => {
                        let exact = ea && eb;
                        (va.max(vb), exact)
                    }
                })
            }
            Program::While(guard, body) => {
                let frame = LoopFrame { guard, body, after: k, memo: RefCell::new(HashMap::new()) };
                self.unfold(&frame, self.fuel, s)
            }
        }
    }

    fn apply(&self, k: &Cont<'_>, s: &State) -> Res<Value> {
        match k {
            Cont::Post(f) => Ok((f(s)?, true)),
            Cont::Seq(rest, next) => match rest {
                [only] => self.wp(only, next, s),
                [first, tail @ ..] => self.wp(first, &Cont::Seq(tail, next), s),
                [] => self.apply(next, s),
            },
            Cont::Loop(frame, n) => self.unfold(frame, *n, s),
        }
    }

    fn unfold(&self, frame: &LoopFrame<'_>, n: u32, s: &State) -> Res<Value> {
        if !frame.guard.eval(s)? {
            return self.apply(frame.after, s);
        }
        if n == 0 {
            return Ok((Rational::zero(), false));
        }
        let key = (n, s.clone());
        if let Some(v) = frame.memo.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = self.wp(frame.body, &Cont::Loop(frame, n - 1), s)?;
        frame.memo.borrow_mut().insert(key, v.clone());
        Ok(v)
    }
}
