//! Honest quantum provers, a structured fast path, and classical baselines.

pub mod classical;
pub mod collision;
pub mod hcollision;
pub mod serial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::RunTrace;
use crate::problems::ENUM_CAP;
use crate::qsim::MAX_QUBITS;
use crate::seed::Seed;

pub use classical::{classical_adversary, AdversaryKind};
pub use collision::{
    collision_depth, collision_program, honest_collision_prover, run_collision_program, CollisionLayout,
    StructuredSampler,
};
pub use hcollision::{honest_h_collision_prover, honest_h_collision_prover_with, HonestHStrategy, H_PROVER_DEPTH};
pub use serial::{serial_cq_prover, SerialStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProverBackend {
    /// Dense state vectors for every entangled block.
    FullStatevector,
    /// Sample the measured image, then simulate only its preimage branch.
    StructuredBranch,
    /// The circuit on sparse amplitude maps.
    SparseCircuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub lambda: usize,
    pub d: usize,
    pub backend: ProverBackend,
    pub trials: usize,
    pub seed: Seed,
}

impl ProverConfig {
    /// Checks the backend can handle one repetition of the collision circuit.
    pub fn validate(&self) -> Result<()> {
        match self.backend {
            ProverBackend::FullStatevector => {
                let width = 2 * self.lambda + 2;
                if width > MAX_QUBITS {
                    return Err(Error::CapExceeded {
                        what: "full state vector qubits",
                        needed: width,
                        cap: MAX_QUBITS,
                    });
                }
                if self.d > 0 {
                    return Err(Error::param(
                        "full state vectors cannot hold the lifted stage registers; use d = 0",
                    ));
                }
            }
            ProverBackend::StructuredBranch => {
                if self.lambda > ENUM_CAP {
                    return Err(Error::CapExceeded {
                        what: "structured lambda",
                        needed: self.lambda,
                        cap: ENUM_CAP,
                    });
                }
            }
            ProverBackend::SparseCircuit => {}
        }
        Ok(())
    }
}

/// A prover's answer with its depth record.
#[derive(Debug, Clone)]
pub struct ProverRun<S> {
    pub solution: S,
    /// Quantum depth of the longest segment.
    pub depth: usize,
    /// Absent for the structured backend, which never builds the circuit state.
    pub trace: Option<RunTrace>,
}
