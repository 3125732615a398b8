use std::sync::Arc;

use crate::par::par_map;
use crate::parser::Domain;
use crate::syntax::{BExpr, Program, Rational, State};

use super::wp::{Choice, Evaluator};
use super::{Expectation, Fuel, Table, TransformError};

/// Arithmetic used between value-iteration steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Keep every iterate exact. Denominators can grow exponentially in the
    /// iteration count.
    Exact,
    /// Round a value down to a multiple of `2^-bits` whenever its denominator
    /// needs more than `bits` bits. Iterates stay lower bounds and stay
    /// nondecreasing in `k`.
    RoundDown { bits: u32 },
}

impl Default for Precision {
    fn default() -> Self {
        Precision::RoundDown { bits: 60 }
    }
}

impl Precision {
    fn apply(self, v: Rational) -> Rational {
        match self {
            Precision::RoundDown { bits } if v.denom_bits() > u64::from(bits) => v.floor_to_dyadic(bits),
            _ => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterOptions {
    pub iters: usize,
    pub fuel: Fuel,
    pub precision: Precision,
}

/// `X_iters` on `dom`, where `X_0 = [!G] * f` and
/// `X_{k+1}(s) = [!G](s) * f(s) + [G](s) * wp(body, X_k)(s)`.
///
/// `X_k` is the expected `f` over runs that leave the loop within `k` body
/// executions, so `iters` counts unfoldings the same way [`Fuel`] does.
/// States outside `dom` read as 0.
pub fn loop_value_iteration(
    guard: &BExpr,
    body: &Program,
    f: &Expectation,
    dom: &Domain,
    iters: usize,
    fuel: Fuel,
) -> Result<Table, TransformError> {
    let opts = IterOptions { iters, fuel, precision: Precision::default() };
    loop_value_iteration_with(guard, body, f, dom, &opts, |_, _| {})
}

/// As [`loop_value_iteration`], calling `observe(k, X_k)` for every iterate
/// including `X_0`.
pub fn loop_value_iteration_with(
    guard: &BExpr,
    body: &Program,
    f: &Expectation,
    dom: &Domain,
    opts: &IterOptions,
    mut observe: impl FnMut(usize, &Table),
) -> Result<Table, TransformError> {
    let domain = Arc::new(dom.clone());
    let states: Vec<State> = domain.states().collect();
    // The guard and the exit value never change between iterations.
    let exits: Vec<Option<Rational>> = states
        .iter()
        .map(|s| if guard.eval(s)? { Ok(None) } else { f.eval(s).map(Some) })
        .collect::<Result<_, TransformError>>()?;
    let eval = Evaluator::new(Choice::Demonic, opts.fuel);

    let initial = exits.iter().map(|e| e.clone().unwrap_or_else(Rational::zero)).collect();
    let mut x = Table::from_values(domain.clone(), initial);
    observe(0, &x);
    for k in 1..=opts.iters {
        let prev = &x;
        let step = |i: usize| -> Result<Rational, TransformError> {
            if let Some(v) = &exits[i] {
                return Ok(v.clone());
            }
            let lookup = |s: &State| Ok(prev.get(s));
            let (v, _) = eval.run(body, &lookup, &states[i])?;
            Ok(opts.precision.apply(v).max(prev.at(i).clone()))
        };
        let values = par_map(states.len(), step).into_iter().collect::<Result<_, _>>()?;
        x = Table::from_values(domain.clone(), values);
        observe(k, &x);
    }
    Ok(x)
}
