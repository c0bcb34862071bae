//! `Ser_d`: `d + 1` CollisionHashing instances, each keyed by the answers to
//! the ones before it.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::Result;
use crate::oracle::{salt, RandomOracle, TruthTable};
use crate::seed::Seed;

use super::collision::{verify_with_table, CollisionInstance, CollisionSolution};
use super::verdict::{RejectReason, Verdict};
use super::{Descriptor, ProblemKind};

#[derive(Debug, Clone)]
pub struct SerialInstance {
    lambda: usize,
    d: usize,
    seed: Seed,
    pk: BitString,
    root: RandomOracle,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialSolution {
    pub steps: Vec<CollisionSolution>,
}

/// Prefix for step `i`: the encodings of steps `0..i` concatenated.
pub fn encode_prefix(steps: &[CollisionSolution]) -> BitString {
    let mut out = BitString::empty();
    for s in steps {
        out.extend(&s.encode());
    }
    out
}

pub fn lift_serial(inner: &CollisionInstance, d: usize) -> SerialInstance {
    let mut root = RandomOracle::root(inner.descriptor().seed, "collision-hashing");
    if !inner.pk().is_empty() {
        root = salt(&root, inner.pk());
    }
    SerialInstance {
        lambda: inner.lambda(),
        d,
        seed: inner.descriptor().seed,
        pk: inner.pk().clone(),
        root,
    }
}

impl SerialInstance {
    pub fn new(seed: Seed, lambda: usize, d: usize, pk: &BitString) -> Result<Self> {
        Ok(lift_serial(&CollisionInstance::new(seed, lambda, pk)?, d))
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn steps(&self) -> usize {
        self.d + 1
    }

    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            problem: ProblemKind::Serial,
            lambda: self.lambda,
            d: Some(self.d),
            seed: self.seed,
            pk: self.pk.clone(),
        }
    }

    /// Step instance under `prefix`; the empty prefix gives the inner instance.
    pub fn step_instance(&self, prefix: &BitString) -> Result<CollisionInstance> {
        let root = if prefix.is_empty() {
            self.root.clone()
        } else {
            salt(&self.root, prefix)
        };
        CollisionInstance::from_root(root, self.lambda)
    }
}

pub fn verify_serial(inst: &SerialInstance, sol: &SerialSolution) -> Result<Verdict> {
    verify_serial_with(inst, sol, |step| step.g_table())
}

/// As [`verify_serial`], with the caller supplying each step's table of `g`.
pub fn verify_serial_with(
    inst: &SerialInstance,
    sol: &SerialSolution,
    mut table: impl FnMut(&CollisionInstance) -> Result<TruthTable>,
) -> Result<Verdict> {
    if sol.steps.len() != inst.steps() {
        return Ok(Verdict::malformed(format!(
            "expected {} steps, got {}",
            inst.steps(),
            sol.steps.len()
        )));
    }
    for i in 0..sol.steps.len() {
        let step = inst.step_instance(&encode_prefix(&sol.steps[..i]))?;
        let t = table(&step)?;
        match verify_with_table(&step, &t, &sol.steps[i], &mut crate::oracle::QueryLog::new())? {
            Verdict::Accept => {}
            Verdict::Reject(r) => {
                return Ok(Verdict::Reject(RejectReason::SerialStep {
                    index: i,
                    inner: Box::new(r),
                }));
            }
        }
    }
    Ok(Verdict::Accept)
}

/// Solves every step by brute force, in order.
pub fn brute_force_serial(inst: &SerialInstance) -> Result<Option<SerialSolution>> {
    let mut steps = Vec::with_capacity(inst.steps());
    for _ in 0..inst.steps() {
        let step = inst.step_instance(&encode_prefix(&steps))?;
        match super::collision::brute_force_collision(&step)? {
            Some(s) => steps.push(s),
            None => return Ok(None),
        }
    }
    Ok(Some(SerialSolution { steps }))
}
