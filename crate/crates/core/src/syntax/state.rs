use std::collections::BTreeMap;
use std::fmt;

use super::{EvalError, Name, Rational};

/// A program state: a finite map from variable names to values.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct State {
    vars: BTreeMap<Name, Rational>,
}

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, Rational)>,
    {
        State { vars: pairs.into_iter().map(|(k, v)| (Name::new(k), v)).collect() }
    }

    /// Looking up an unbound variable is an error; there is no implicit zero.
    pub fn get(&self, name: &Name) -> Result<&Rational, EvalError> {
        self.vars.get(name).ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
    }

    pub fn lookup(&self, name: &str) -> Option<&Rational> {
        self.vars.get(name)
    }

    pub fn set(&mut self, name: Name, value: Rational) {
        self.vars.insert(name, value);
    }

    pub fn with(&self, name: &Name, value: Rational) -> State {
        let mut s = self.clone();
        s.set(name.clone(), value);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Rational)> {
        self.vars.iter()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }
}

/// Renders as `x=1,y=1/2`, the format accepted by `--init`.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}
