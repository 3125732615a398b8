//! Core data model: exact rationals, expressions, programs and states.

mod expr;
mod program;
mod rational;
mod state;

pub(crate) use expr::{apply_binary, apply_unary};
pub use expr::{harmonic, BExpr, BinOp, CmpOp, Expr, Name, UnaryFn, HARMONIC_LIMIT, POW_LIMIT};
pub use program::{fold_prefix, Prefix, Program};
pub use rational::{ParseRationalError, Rational};
pub use state::State;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} expects an integer argument, got {value}")]
    NonIntegerArgument { func: &'static str, value: Rational },
    #[error("{func} expects a non-negative argument, got {value}")]
    NegativeArgument { func: &'static str, value: Rational },
    #[error("{func} argument {value} is too large")]
    ArgumentTooLarge { func: &'static str, value: Rational },
}
