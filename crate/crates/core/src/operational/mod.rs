//! Forward execution: a small-step machine, demonic schedulers and seeded
//! Monte-Carlo estimation of termination frequencies.
//!
//! Each step dispatches one pending statement. Trials draw from their own
//! splitmix64 stream derived from the master seed and the trial index, so a
//! summary does not depend on how trials are spread over threads.

mod machine;
mod rng;
mod scheduler;

pub use machine::{Config, Machine, Step};
pub use rng::{rng_bernoulli, trial_seed, RngStream};
pub use scheduler::{ParseSchedulerError, Scheduler};

use std::fmt;

use crate::par::par_map;
use crate::syntax::{EvalError, Program, Rational, State};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(Rational),
}

/// Problems detected before any trial runs.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("the greedy scheduler needs loop-free branches at every demonic choice")]
    GreedyNeedsLoopFree,
    #[error("invalid simulation parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrialOutcome {
    Terminated {
        state: State,
        steps: u64,
    },
    /// Still running after the step cap.
    Censored,
    Errored(String),
}

/// Advances `c` by one statement.
pub fn step_config(m: &Machine, c: &mut Config, rng: &mut RngStream) -> Result<Step, RuntimeError> {
    m.step(c, rng)
}

enum Raw {
    Terminated(u64),
    Censored,
    Errored(RuntimeError),
}

fn run_raw(m: &Machine, c: &mut Config, max_steps: u64, seed: u64) -> Raw {
    let mut rng = RngStream::new(seed);
    m.restart(c);
    match m.run_until(c, &mut rng, max_steps) {
        Ok(Step::Terminated) => Raw::Terminated(c.steps()),
        Ok(Step::Running) => Raw::Censored,
        Err(e) => Raw::Errored(*e),
    }
}

/// Runs one execution for at most `max_steps` steps with the given seed.
pub fn run_trial(
    prog: &Program,
    init: &State,
    sch: &Scheduler,
    max_steps: u64,
    seed: u64,
) -> Result<TrialOutcome, SimError> {
    if max_steps == 0 {
        return Err(SimError::InvalidParameters("max_steps must be at least 1".into()));
    }
    let m = Machine::new(prog, init, sch)?;
    let mut c = m.start();
    Ok(match run_raw(&m, &mut c, max_steps, seed) {
        Raw::Terminated(steps) => TrialOutcome::Terminated { state: m.state(&c), steps },
        Raw::Censored => TrialOutcome::Censored,
        Raw::Errored(e) => TrialOutcome::Errored(e.to_string()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub trials: u64,
    pub terminated: u64,
    pub censored: u64,
    pub errored: u64,
    pub termination_fraction: Rational,
    /// Wilson score interval at 95% for the termination probability.
    pub wilson95: (f64, f64),
    pub mean_steps_terminated: Rational,
    /// Message of the lowest-numbered errored trial.
    pub first_error: Option<String>,
}

/// Wilson score interval with `z = 1.96`.
pub fn wilson95(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96_f64;
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let center = (p + z * z / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

const CHUNK: u64 = 256;

/// Runs trials `0..trials` and aggregates their outcomes.
pub fn simulate(
    prog: &Program,
    init: &State,
    sch: &Scheduler,
    trials: u64,
    max_steps: u64,
    master_seed: u64,
) -> Result<SimSummary, SimError> {
    if trials == 0 || max_steps == 0 {
        return Err(SimError::InvalidParameters("trials and max_steps must be at least 1".into()));
    }
    let m = Machine::new(prog, init, sch)?;
    let chunks = trials.div_ceil(CHUNK);
    let parts = par_map(chunks as usize, |k| {
        let mut c = m.start();
        let (mut term, mut cens, mut err, mut steps) = (0u64, 0u64, 0u64, 0u128);
        let mut first_error = None;
        let lo = k as u64 * CHUNK;
        for i in lo..(lo + CHUNK).min(trials) {
            let seed = trial_seed(master_seed, i);
            match run_raw(&m, &mut c, max_steps, seed) {
                Raw::Terminated(s) => {
                    term += 1;
                    steps += u128::from(s);
                }
                Raw::Censored => cens += 1,
                Raw::Errored(e) => {
                    err += 1;
                    first_error.get_or_insert_with(|| format!("trial {i}: {e}"));
                }
            }
        }
        (term, cens, err, steps, first_error)
    });
    let mut s = SimSummary {
        trials,
        terminated: 0,
        censored: 0,
        errored: 0,
        termination_fraction: Rational::zero(),
        wilson95: (0.0, 0.0),
        mean_steps_terminated: Rational::zero(),
        first_error: None,
    };
    let mut total_steps = 0u128;
    for (t, c, e, st, fe) in parts {
        s.terminated += t;
        s.censored += c;
        s.errored += e;
        total_steps += st;
        if s.first_error.is_none() {
            s.first_error = fe;
        }
    }
    let ratio = |a: u128, b: u64| {
        let a = num_bigint::BigInt::from(a);
        Rational::from_big(num_rational::BigRational::new(a, b.into()))
    };
    s.termination_fraction = ratio(u128::from(s.terminated), trials);
    s.wilson95 = wilson95(s.terminated, trials);
    if s.terminated > 0 {
        s.mean_steps_terminated = ratio(total_steps, s.terminated);
    }
    Ok(s)
}

impl fmt::Display for SimSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials                 {}", self.trials)?;
        writeln!(f, "terminated             {}", self.terminated)?;
        writeln!(f, "censored               {}", self.censored)?;
        writeln!(f, "errored                {}", self.errored)?;
        writeln!(f, "termination fraction   {}", self.termination_fraction.display_with_decimal())?;
        writeln!(f, "wilson 95%             [{:.6}, {:.6}]", self.wilson95.0, self.wilson95.1)?;
        writeln!(f, "mean steps (terminated) {}", self.mean_steps_terminated.display_with_decimal())?;
        if let Some(e) = &self.first_error {
            writeln!(f, "first error            {e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
