//! Base sets, set matrices and shadow oracles over a composed oracle, with
//! Monte-Carlo checks of their hitting probabilities.

pub mod lab;
pub mod sets;
pub mod shadow;

pub use lab::{run_shadowlab, FindCell, QcCell, ShadowlabConfig, ShadowlabReport};
pub use sets::{
    gen_base_sets, gen_set_matrix, gen_set_matrix_qc, gen_set_row_qc, AbortReason, BaseSets, PathQueries, SetMatrix,
};
pub use shadow::{make_shadow, trace_qnc, PathTrace, ShadowOracle, BOT};
