use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::Backend;
use crate::problems::constants::{capital_c, h_collision_hit_bound};
use crate::problems::hcollision::H;
use crate::problems::{verify_h_collision, HCollisionInstance};
use crate::provers::{honest_h_collision_prover, H_PROVER_DEPTH};
use crate::seed::Seed;
use crate::stats::Proportion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HCollisionConfig {
    pub lambda: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: Seed,
    pub backend: Backend,
}

impl HCollisionConfig {
    pub fn new(lambda: usize, d: usize, trials: usize, seed: Seed) -> Self {
        HCollisionConfig {
            lambda,
            d,
            trials,
            seed,
            backend: Backend::Sparse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HCollisionReport {
    pub experiment: String,
    pub config: HCollisionConfig,
    pub acceptance: Proportion,
    /// Probability that enough repetitions land in `TwoToOne`, ignoring
    /// duplicates and the equation.
    pub hit_bound: f64,
    pub min_depth: usize,
    pub max_depth: usize,
    /// `(d + 1)·λ`.
    pub expected_stage_queries: usize,
    /// Trials whose stage queries to the composed oracle differ from
    /// `expected_stage_queries`.
    pub stage_query_mismatches: u64,
}

impl HCollisionReport {
    pub fn depth_is_constant(&self) -> bool {
        self.min_depth == H_PROVER_DEPTH && self.max_depth == H_PROVER_DEPTH
    }
}

struct Trial {
    accepted: bool,
    depth: usize,
    stage_queries: usize,
}

fn trial(cfg: &HCollisionConfig, t: u64) -> Result<Trial> {
    let seed = cfg.seed.trial(t);
    let inst = HCollisionInstance::new(seed.role("instance"), cfg.lambda, cfg.d, &BitString::empty())?;
    let run = honest_h_collision_prover(&inst, cfg.backend, &mut seed.role("prover").rng())?;
    let accepted = verify_h_collision(&inst, &run.solution)?.is_accept();
    let stage_queries = run
        .trace
        .as_ref()
        .map_or(0, |tr| tr.queries.count_where(|n| n.starts_with('H') && n != H));
    Ok(Trial {
        accepted,
        depth: run.depth,
        stage_queries,
    })
}

/// The honest QC prover for d-h-CollisionHashing over fresh instances.
pub fn h_collision_experiment(cfg: &HCollisionConfig) -> Result<HCollisionReport> {
    if cfg.trials == 0 {
        return Err(Error::param("at least one trial is needed"));
    }
    let results: Vec<Trial> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, t))
        .collect::<Result<_>>()?;
    let n = results.len() as u64;
    let expected = (cfg.d + 1) * cfg.lambda;
    let needed = (3.0 * capital_c() * cfg.lambda as f64 / 4.0).ceil() as u64;
    Ok(HCollisionReport {
        experiment: "hcollision".into(),
        config: *cfg,
        acceptance: Proportion::new(results.iter().filter(|r| r.accepted).count() as u64, n),
        hit_bound: h_collision_hit_bound(cfg.lambda, needed),
        min_depth: results.iter().map(|r| r.depth).min().unwrap_or(0),
        max_depth: results.iter().map(|r| r.depth).max().unwrap_or(0),
        expected_stage_queries: expected,
        stage_query_mismatches: results.iter().filter(|r| r.stage_queries != expected).count() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_and_queries_are_exact() {
        for d in [0, 2] {
            let r = h_collision_experiment(&HCollisionConfig::new(4, d, 10, Seed::from_u64(6))).unwrap();
            assert!(r.depth_is_constant());
            assert_eq!(r.stage_query_mismatches, 0);
            assert_eq!(r.expected_stage_queries, (d + 1) * 4);
            assert!(r.acceptance.successes > 0);
        }
    }
}
