//! CQ prover for the serial lifting: one fully measured collision circuit per
//! step, each run against the oracles salted with the answers so far.

use std::sync::Arc;

use rand::Rng;

use crate::bits::BitString;
use crate::error::Result;
use crate::hybrid::{run_cq, Backend, ClassicalOracles, CqAction, CqStrategy, DepthBudget, RunOptions};
use crate::problems::serial::encode_prefix;
use crate::problems::{CollisionSolution, SerialInstance, SerialSolution};

use super::collision::{collision_depth, collision_program, CollisionLayout};
use super::ProverRun;

pub struct SerialStrategy {
    inst: SerialInstance,
    steps: Vec<CollisionSolution>,
    layout: Option<CollisionLayout>,
}

impl SerialStrategy {
    pub fn new(inst: SerialInstance) -> Self {
        SerialStrategy {
            inst,
            steps: Vec::new(),
            layout: None,
        }
    }

    pub fn steps(&self) -> &[CollisionSolution] {
        &self.steps
    }
}

impl CqStrategy for SerialStrategy {
    fn step(&mut self, last: Option<&BitString>, _: &mut ClassicalOracles<'_>) -> Result<CqAction> {
        if let (Some(out), Some(lay)) = (last, self.layout.take()) {
            self.steps.push(CollisionSolution {
                triples: lay.decode(out),
            });
        }
        if self.steps.len() == self.inst.steps() {
            return Ok(CqAction::Finish(encode_prefix(&self.steps)));
        }
        let step = self.inst.step_instance(&encode_prefix(&self.steps))?;
        let (program, lay) = collision_program(&step, self.inst.lambda());
        self.layout = Some(lay);
        Ok(CqAction::RunWith(program, Arc::new(step.oracles())))
    }
}

/// `d + 1` CQ segments of depth 4, one per step.
pub fn serial_cq_prover<R: Rng + ?Sized>(
    inst: &SerialInstance,
    backend: Backend,
    rng: &mut R,
) -> Result<ProverRun<SerialSolution>> {
    let depth = collision_depth(None);
    let budget = DepthBudget::new(depth, inst.steps(), false)?;
    let base = inst.step_instance(&BitString::empty())?.oracles();
    let mut strategy = SerialStrategy::new(inst.clone());
    let trace = run_cq(
        budget,
        &mut strategy,
        &base,
        RunOptions {
            backend,
            query_budget: None,
        },
        rng,
    )?;
    let solution = SerialSolution { steps: strategy.steps };
    Ok(ProverRun {
        solution,
        depth: trace.max_depth(),
        trace: Some(trace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{verify_serial, SerialInstance};
    use crate::seed::Seed;

    #[test]
    fn one_segment_per_step() {
        let mut rng = Seed::from_u64(1).rng();
        for d in 0..4 {
            let inst = SerialInstance::new(Seed::from_u64(d as u64), 5, d, &BitString::empty()).unwrap();
            let run = serial_cq_prover(&inst, Backend::Sparse, &mut rng).unwrap();
            let trace = run.trace.unwrap();
            assert_eq!(trace.segments.len(), d + 1);
            assert_eq!(run.depth, 4);
            assert_eq!(run.solution.steps.len(), d + 1);
            assert_eq!(trace.output, encode_prefix(&run.solution.steps));
        }
    }

    #[test]
    fn d_zero_matches_the_single_prover() {
        use crate::problems::CollisionInstance;
        use crate::provers::{honest_collision_prover, ProverBackend};
        let seed = Seed::from_u64(2);
        let inner = CollisionInstance::new(seed, 5, &BitString::empty()).unwrap();
        let inst = SerialInstance::new(seed, 5, 0, &BitString::empty()).unwrap();
        let a = serial_cq_prover(&inst, Backend::Sparse, &mut Seed::from_u64(3).rng()).unwrap();
        let b = honest_collision_prover(&inner, ProverBackend::SparseCircuit, &mut Seed::from_u64(3).rng()).unwrap();
        assert_eq!(a.solution.steps[0], b.solution);
    }

    #[test]
    fn chain_verdict_is_the_conjunction_of_step_verdicts() {
        use crate::problems::collision::verify_collision_hashing;
        let inst = SerialInstance::new(Seed::from_u64(4), 6, 1, &BitString::empty()).unwrap();
        let mut rng = Seed::from_u64(5).rng();
        let mut per_step = [0; 2];
        for _ in 0..40 {
            let run = serial_cq_prover(&inst, Backend::Sparse, &mut rng).unwrap();
            let mut all = true;
            for (i, count) in per_step.iter_mut().enumerate() {
                let step = inst.step_instance(&encode_prefix(&run.solution.steps[..i])).unwrap();
                let ok = verify_collision_hashing(&step, &run.solution.steps[i])
                    .unwrap()
                    .is_accept();
                *count += ok as usize;
                all &= ok;
            }
            assert_eq!(verify_serial(&inst, &run.solution).unwrap().is_accept(), all);
        }
        assert!(per_step.iter().all(|&c| c >= 5), "{per_step:?}");
    }
}
