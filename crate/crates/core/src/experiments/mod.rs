//! Multi-trial harnesses for the problems and provers, each returning a
//! serializable report.

pub mod collision;
pub mod constants;
pub mod hcollision;
pub mod serial;

pub use collision::{
    backend_cross_check, budgeted_attempt, honest_collision_experiment, CollisionConfig, CollisionReport,
    CrossCheckReport, DepthCheck, Interference, OutcomeClass,
};
pub use constants::{constants_table, ConstantRow, ConstantsReport};
pub use hcollision::{h_collision_experiment, HCollisionConfig, HCollisionReport};
pub use serial::{serial_experiment, tamper_step, SerialConfig, SerialReport};
