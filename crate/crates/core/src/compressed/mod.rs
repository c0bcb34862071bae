//! Compressed phase oracle over a database register, its purified reference,
//! and the two-continuation collision extractor.

pub mod algorithm;
pub mod database;
pub mod extract;
pub mod state;

pub use algorithm::{
    equivalence_suite, run_compressed, run_purified, CompressedRun, EquivalenceCase, EquivalenceReport, Step,
    TestAlgorithm,
};
pub use database::{all_databases, Database};
pub use extract::{extract_collision, ClawPoint, Emission, ExtractConfig, ExtractReport, ExtractTarget};
pub use state::{decomp_involution_error, decomp_matrix, CompressedState};
