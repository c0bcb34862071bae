//! Hybrid circuit classes with depth budgets: QNC, QC, CQ and CQC.

mod machine;
mod program;
mod run;

pub use machine::{Backend, Machine, SparseState, PRUNE};
pub use program::{
    Access, ClassicalOracles, DepthBudget, Model, OracleCall, OracleSet, QOp, QProgram, Target, CACHE_BITS,
};
pub use run::{
    run_cq, run_cqc, run_qc, run_qnc, write_bits_layer, CqAction, CqAsCqc, CqStrategy, CqcAction, CqcStrategy,
    Measurement, ProgramStrategy, QcAction, QcAsCqc, QcStrategy, RunOptions, RunTrace,
};
