use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::{BitFunction, QueryLog, TruthTable};
use crate::qsim::GateLayer;

/// Inputs up to this width get a cached table for quantum access.
pub const CACHE_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Qnc,
    Qc,
    Cq,
    Cqc,
}

/// Per-segment quantum depth `d`, at most `m` segments, and whether one extra
/// layer may follow the last oracle round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthBudget {
    pub d: usize,
    pub m: usize,
    pub allow_final_layer: bool,
}

impl DepthBudget {
    pub fn new(d: usize, m: usize, allow_final_layer: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("a budget needs at least one segment"));
        }
        Ok(DepthBudget {
            d,
            m,
            allow_final_layer,
        })
    }

    pub fn single(d: usize) -> Self {
        DepthBudget {
            d,
            m: 1,
            allow_final_layer: false,
        }
    }

    pub fn with_final_layer(mut self) -> Self {
        self.allow_final_layer = true;
        self
    }

    /// Largest depth a segment may reach.
    pub fn ceiling(&self) -> usize {
        self.d + self.allow_final_layer as usize
    }

    /// Whether an op bringing a segment from `depth` to `depth + 1` is allowed.
    pub fn admit(&self, depth: usize, op: &QOp) -> Result<()> {
        let next = depth + 1;
        let extra = next == self.d + 1 && self.allow_final_layer && matches!(op, QOp::Layer(_));
        if next <= self.d || extra {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                attempted: next,
                d: self.d,
                final_layer: self.allow_final_layer,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Xor(Vec<usize>),
    Phase(Vec<usize>),
}

impl Target {
    pub fn qubits(&self) -> &[usize] {
        match self {
            Target::Xor(q) | Target::Phase(q) => q,
        }
    }
}

/// One oracle copy inside a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCall {
    pub oracle: String,
    pub query: Vec<usize>,
    pub target: Target,
}

impl OracleCall {
    pub fn xor(oracle: &str, query: Vec<usize>, out: Vec<usize>) -> Self {
        OracleCall {
            oracle: oracle.to_string(),
            query,
            target: Target::Xor(out),
        }
    }

    pub fn phase(oracle: &str, query: Vec<usize>, z: Vec<usize>) -> Self {
        OracleCall {
            oracle: oracle.to_string(),
            query,
            target: Target::Phase(z),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.query.iter().chain(self.target.qubits()).copied()
    }
}

/// A unit of quantum depth: one gate layer or one parallel oracle round.
#[derive(Debug, Clone)]
pub enum QOp {
    Layer(GateLayer),
    Oracle(Vec<OracleCall>),
}

impl QOp {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            QOp::Layer(l) => l.qubits().collect(),
            QOp::Oracle(calls) => calls.iter().flat_map(|c| c.qubits()).collect(),
        }
    }
}

/// A fixed sequence of depth units followed by a measurement of `measure`.
#[derive(Debug, Clone)]
pub struct QProgram {
    pub num_qubits: usize,
    pub ops: Vec<QOp>,
    pub measure: Vec<usize>,
}

impl QProgram {
    pub fn depth(&self) -> usize {
        self.ops.len()
    }

    pub fn oracle_rounds(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, QOp::Oracle(_))).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Access {
    Quantum,
    ClassicalOnly,
}

struct Entry {
    f: Arc<dyn BitFunction>,
    access: Access,
    table: OnceLock<Option<Arc<TruthTable>>>,
}

/// Named oracles available to a run.
#[derive(Default)]
pub struct OracleSet {
    entries: BTreeMap<String, Entry>,
}

impl OracleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, f: Arc<dyn BitFunction>, access: Access) -> &mut Self {
        self.entries.insert(
            name.to_string(),
            Entry {
                f,
                access,
                table: OnceLock::new(),
            },
        );
        self
    }

    pub fn with(mut self, name: &str, f: Arc<dyn BitFunction>, access: Access) -> Self {
        self.insert(name, f, access);
        self
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    fn entry(&self, name: &str) -> Result<&Entry> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownOracle(name.to_string()))
    }

    pub fn access(&self, name: &str) -> Result<Access> {
        Ok(self.entry(name)?.access)
    }

    pub fn function(&self, name: &str) -> Result<&Arc<dyn BitFunction>> {
        Ok(&self.entry(name)?.f)
    }

    /// The function behind a superposition query, tabulated when small.
    pub fn quantum(&self, name: &str) -> Result<Arc<dyn BitFunction>> {
        let e = self.entry(name)?;
        if e.access != Access::Quantum {
            return Err(Error::IllegalQuantumQuery(name.to_string()));
        }
        let table = e.table.get_or_init(|| {
            let f = &e.f;
            (f.in_bits() <= CACHE_BITS && f.out_bits() <= 64)
                .then(|| Arc::new(TruthTable::from_fn(f.in_bits(), f.out_bits(), |x| f.apply_u64(x))))
        });
        Ok(match table {
            Some(t) => t.clone(),
            None => e.f.clone(),
        })
    }
}

/// The only oracle access a classical part gets: logged, budgeted, basis inputs.
pub struct ClassicalOracles<'a> {
    set: &'a OracleSet,
    log: &'a mut QueryLog,
    budget: Option<usize>,
}

impl<'a> ClassicalOracles<'a> {
    pub fn new(set: &'a OracleSet, log: &'a mut QueryLog, budget: Option<usize>) -> Self {
        ClassicalOracles { set, log, budget }
    }

    pub fn query(&mut self, name: &str, x: &BitString) -> Result<BitString> {
        let f = self.set.function(name)?;
        if let Some(b) = self.budget {
            if self.log.len() >= b {
                return Err(Error::QueryBudget(b));
            }
        }
        if x.len() != f.in_bits() {
            return Err(Error::WidthMismatch {
                expected: f.in_bits(),
                got: x.len(),
            });
        }
        let y = f.apply(x);
        self.log.record(name, x.clone(), y.clone());
        Ok(y)
    }

    pub fn queries(&self) -> usize {
        self.log.len()
    }

    pub fn in_bits(&self, name: &str) -> Result<usize> {
        Ok(self.set.function(name)?.in_bits())
    }
}
