//! Problem instances, verifiers, the `Rec_d` and `Ser_d` lifts, and brute-force
//! reference solvers.

pub mod code;
pub mod collision;
pub mod constants;
pub mod hcollision;
pub mod serial;
mod verdict;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::seed::Seed;

pub use code::{brute_force_code, verify_code_hashing, Code, CodeHashingInstance, CodeSolution, RepetitionCode};
pub use collision::{
    brute_force_collision, verify_collision_hashing, CollisionInstance, CollisionSolution, CollisionTriple,
    EquationOracle,
};
pub use hcollision::{
    brute_force_h_collision, two_to_one_set, verify_h_collision, HCollisionInstance, HCollisionSolution,
    HCollisionTriple,
};
pub use serial::{brute_force_serial, lift_serial, verify_serial, SerialInstance, SerialSolution};
pub use verdict::{RejectReason, Verdict};

/// Largest `λ` for exhaustive preimage counting.
pub const ENUM_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    CollisionHashing,
    HCollisionHashing,
    CodeHashing,
    Serial,
}

/// Everything needed to rebuild an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub problem: ProblemKind,
    pub lambda: usize,
    /// Lift depth; `None` for an unlifted instance.
    pub d: Option<usize>,
    pub seed: Seed,
    pub pk: BitString,
}
