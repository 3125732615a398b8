use std::fmt;
use std::str::FromStr;

use crate::parser::parse_expr;
use crate::syntax::Expr;

/// Policy resolving demonic choices during simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheduler {
    Left,
    Right,
    /// Left, right, left, ... counted per trial.
    Alternate,
    /// A fair coin from the trial's random stream.
    Random,
    /// The branch after which the expected value of the expression is
    /// smaller; ties go left. Needs loop-free branches.
    GreedyMin(Expr),
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheduler::Left => f.write_str("left"),
            Scheduler::Right => f.write_str("right"),
            Scheduler::Alternate => f.write_str("alternate"),
            Scheduler::Random => f.write_str("random"),
            Scheduler::GreedyMin(e) => write!(f, "greedy-min({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scheduler `{0}` (expected left, right, alternate, random or greedy-min(<expr>))")]
pub struct ParseSchedulerError(pub String);

impl FromStr for Scheduler {
    type Err = ParseSchedulerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s {
            "left" => Scheduler::Left,
            "right" => Scheduler::Right,
            "alternate" => Scheduler::Alternate,
            "random" => Scheduler::Random,
            _ => {
                let inner = s
                    .strip_prefix("greedy-min(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| ParseSchedulerError(s.to_string()))?;
                Scheduler::GreedyMin(parse_expr(inner).map_err(|e| ParseSchedulerError(format!("{s}: {e}")))?)
            }
        })
    }
}
