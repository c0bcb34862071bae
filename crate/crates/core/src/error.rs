use thiserror::Error;

/// Every failure the lab can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("qubit {0} used twice in one layer or round")]
    QubitClash(usize),

    #[error("gate on qubits {qubits:?} is not unitary (deviation {deviation:e})")]
    NotUnitary { qubits: Vec<usize>, deviation: f64 },

    #[error("depth budget exceeded: operation {attempted} with budget d={d} (final layer allowed: {final_layer})")]
    BudgetExceeded {
        attempted: usize,
        d: usize,
        final_layer: bool,
    },

    #[error("segment overflow: segment {attempted} with at most {m} allowed")]
    SegmentOverflow { attempted: usize, m: usize },

    #[error("oracle `{0}` may only be queried classically")]
    IllegalQuantumQuery(String),

    #[error("unknown oracle `{0}`")]
    UnknownOracle(String),

    #[error("classical query budget of {0} exhausted")]
    QueryBudget(usize),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("malformed proof: {0}")]
    MalformedProof(String),

    #[error("decode error: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
