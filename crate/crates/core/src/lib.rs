//! Weakest pre-expectation reasoning and almost-sure termination checking for
//! pGCL, the probabilistic guarded command language.
//!
//! * [`syntax`]: exact rationals, expressions, programs, states.
//! * [`parser`]: concrete syntax for programs, certificates and domains.
//! * [`transformer`]: `wp`/`awp` evaluation and loop value iteration.
//! * [`checker`]: proof obligations of the variant rules and the
//!   non-termination certificate, discharged over a finite domain.
//! * [`operational`]: small-step execution and seeded Monte-Carlo simulation.
//! * [`corpus`]: the bundled fixture programs with their expected verdicts.

pub mod checker;
pub mod corpus;
pub mod operational;
mod par;
pub mod parser;
pub mod syntax;
pub mod transformer;

#[cfg(feature = "strategies")]
pub mod strategies;

pub use syntax::{BExpr, EvalError, Expr, Name, Program, Rational, State};
