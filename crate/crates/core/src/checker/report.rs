use std::fmt;

use crate::syntax::{Rational, State};

/// Ordered from best to worst, so the overall verdict is the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    PassOnDomain,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PassOnDomain => "PASS-ON-DOMAIN",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Fail => "FAIL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PASS-ON-DOMAIN" => Some(Verdict::PassOnDomain),
            "INCONCLUSIVE" => Some(Verdict::Inconclusive),
            "FAIL" => Some(Verdict::Fail),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a condition was violated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    State(State),
    /// A point `v` of the p/d grid.
    GridPoint(Rational),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::State(s) => write!(f, "{s}"),
            Witness::GridPoint(v) => write!(f, "v={v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub name: String,
    pub verdict: Verdict,
    pub counterexample: Option<Witness>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub entries: Vec<Entry>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn overall(&self) -> Verdict {
        self.entries.iter().map(|e| e.verdict).max().unwrap_or(Verdict::PassOnDomain)
    }

    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
        self.warnings.extend(other.warnings);
    }

    /// One `condition <name> <verdict> [state <var>=<val>,...]` line per entry.
    pub fn machine_lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| match &e.counterexample {
                Some(w) => format!("condition {} {} state {w}", e.name, e.verdict),
                None => format!("condition {} {}", e.name, e.verdict),
            })
            .collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.title, self.overall())?;
        for e in &self.entries {
            write!(f, "  {:<16} {:<26}", e.verdict.as_str(), e.name)?;
            if let Some(w) = &e.counterexample {
                write!(f, " at {w}:")?;
            }
            writeln!(f, " {}", e.detail)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for line in self.machine_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Accumulates per-state outcomes of one condition, keeping the first
/// failing state in enumeration order.
pub(crate) struct Tally {
    name: String,
    checked: usize,
    fail: Option<(Witness, String)>,
    inconclusive: Option<(Witness, String)>,
}

pub(crate) enum Outcome {
    Holds,
    Fails(String),
    /// Failed only against a fuel-limited lower bound.
    Unknown(String),
}

impl Tally {
    pub(crate) fn new(name: &str) -> Self {
        Tally { name: name.into(), checked: 0, fail: None, inconclusive: None }
    }

    pub(crate) fn record(&mut self, at: impl FnOnce() -> Witness, o: Outcome) {
        self.checked += 1;
        match o {
            Outcome::Holds => {}
            Outcome::Fails(d) if self.fail.is_none() => self.fail = Some((at(), d)),
            Outcome::Unknown(d) if self.inconclusive.is_none() => self.inconclusive = Some((at(), d)),
            _ => {}
        }
    }

    pub(crate) fn finish(self, unit: &str) -> Entry {
        let (verdict, counterexample, detail) = if let Some((w, d)) = self.fail {
            (Verdict::Fail, Some(w), d)
        } else if let Some((w, d)) = self.inconclusive {
            (Verdict::Inconclusive, Some(w), d)
        } else {
            (Verdict::PassOnDomain, None, format!("holds at {} {unit}", self.checked))
        };
        Entry { name: self.name, verdict, counterexample, detail }
    }
}
