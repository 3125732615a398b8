use std::fmt;
use std::sync::Arc;

use crate::parser::Domain;
use crate::syntax::{Expr, Rational, State};

use super::TransformError;

/// Values of an expectation on a finite domain; states outside the domain read as 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    domain: Arc<Domain>,
    values: Vec<Rational>,
}

impl Table {
    pub fn zeros(domain: Arc<Domain>) -> Self {
        let values = vec![Rational::zero(); domain.size()];
        Table { domain, values }
    }

    /// Panics if `values` does not have one entry per domain state.
    pub fn from_values(domain: Arc<Domain>, values: Vec<Rational>) -> Self {
        assert_eq!(values.len(), domain.size(), "table size must match its domain");
        Table { domain, values }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, s: &State) -> Rational {
        match self.domain.index_of(s) {
            Some(i) => self.values[i].clone(),
            None => Rational::zero(),
        }
    }

    pub fn at(&self, i: usize) -> &Rational {
        &self.values[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (State, &Rational)> + '_ {
        self.domain.states().zip(self.values.iter())
    }

    pub fn max_value(&self) -> Rational {
        self.values.iter().cloned().max().unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, v) in self.iter() {
            writeln!(f, "{s}\t{}", v.display_with_decimal())?;
        }
        Ok(())
    }
}

/// A post-expectation: a closed form, or a table over a finite domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Expr(Expr),
    Table(Table),
}

impl Expectation {
    pub fn constant(r: Rational) -> Self {
        Expectation::Expr(Expr::lit(r))
    }

    pub fn one() -> Self {
        Expectation::constant(Rational::one())
    }

    /// Evaluates at `s`; a closed form that comes out negative is an error.
    pub fn eval(&self, s: &State) -> Result<Rational, TransformError> {
        match self {
            Expectation::Expr(e) => {
                let v = e.eval(s)?;
                if v.is_negative() {
                    return Err(TransformError::NegativeExpectation { value: v, state: s.clone() });
                }
                Ok(v)
            }
            Expectation::Table(t) => Ok(t.get(s)),
        }
    }
}

impl From<Expr> for Expectation {
    fn from(e: Expr) -> Self {
        Expectation::Expr(e)
    }
}

impl From<Table> for Expectation {
    fn from(t: Table) -> Self {
        Expectation::Table(t)
    }
}
