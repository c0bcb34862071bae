use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::Result;

use super::RandomOracle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub oracle: String,
    pub input: BitString,
    pub output: BitString,
    pub index: u64,
}

/// Append-only record of classical queries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLog {
    entries: Vec<QueryRecord>,
}

impl QueryLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluates `oracle` at `x` and records the query.
    pub fn eval(&mut self, oracle: &RandomOracle, x: &BitString) -> Result<BitString> {
        let y = oracle.eval(x)?;
        self.record(oracle.name(), x.clone(), y.clone());
        Ok(y)
    }

    pub fn record(&mut self, oracle: &str, input: BitString, output: BitString) {
        let index = self.entries.len() as u64;
        self.entries.push(QueryRecord {
            oracle: oracle.to_string(),
            input,
            output,
            index,
        });
    }

    pub fn entries(&self) -> &[QueryRecord] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries whose oracle label satisfies `pred`.
    pub fn count_where(&self, pred: impl Fn(&str) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(&e.oracle)).count()
    }

    pub fn append(&mut self, other: QueryLog) {
        for e in other.entries {
            self.record(&e.oracle, e.input, e.output);
        }
    }
}
