//! Simulation lab for proofs of quantum depth in the random-oracle model.

pub mod bits;
pub mod compressed;
pub mod error;
pub mod experiments;
pub mod hybrid;
pub mod oracle;
pub mod podq;
pub mod problems;
pub mod provers;
pub mod qsim;
pub mod seed;
pub mod shadowlab;
pub mod stats;

pub use bits::BitString;
pub use error::{Error, Result};
pub use oracle::{BitFunction, RandomOracle};
pub use seed::Seed;
