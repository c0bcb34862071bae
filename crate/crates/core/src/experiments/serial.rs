use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::Backend;
use crate::problems::constants::serial_product_bound;
use crate::problems::{verify_serial, SerialInstance, SerialSolution};
use crate::provers::serial_cq_prover;
use crate::seed::Seed;
use crate::stats::Proportion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialConfig {
    pub lambda: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: Seed,
    pub backend: Backend,
}

impl SerialConfig {
    pub fn new(lambda: usize, d: usize, trials: usize, seed: Seed) -> Self {
        SerialConfig {
            lambda,
            d,
            trials,
            seed,
            backend: Backend::Sparse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialReport {
    pub experiment: String,
    pub config: SerialConfig,
    /// Product of the per-step Chernoff bounds.
    pub product_bound: f64,
    pub honest: Proportion,
    pub max_depth: usize,
    pub max_segments: usize,
    /// Rejections of honest chains with one step invalidated.
    pub tamper_rejected: Proportion,
    /// How often each step index was the tampered one.
    pub tamper_indices: Vec<u64>,
}

impl SerialReport {
    pub fn completeness_ok(&self) -> bool {
        self.honest.rate >= self.product_bound
    }
}

/// Invalidates step `index`: every `m` bit is flipped, so each two-preimage
/// triple of that step breaks the claw equation.
pub fn tamper_step(chain: &SerialSolution, index: usize) -> SerialSolution {
    let mut bad = chain.clone();
    for t in &mut bad.steps[index].triples {
        t.m = !t.m;
    }
    bad
}

struct Trial {
    accepted: bool,
    depth: usize,
    segments: usize,
    tamper_index: usize,
    tamper_rejected: bool,
}

fn trial(cfg: &SerialConfig, t: u64) -> Result<Trial> {
    let seed = cfg.seed.trial(t);
    let inst = SerialInstance::new(seed.role("instance"), cfg.lambda, cfg.d, &BitString::empty())?;
    let mut rng = seed.role("prover").rng();
    let run = serial_cq_prover(&inst, cfg.backend, &mut rng)?;
    let accepted = verify_serial(&inst, &run.solution)?.is_accept();
    let tamper_index = rng.random_range(0..inst.steps());
    let bad = tamper_step(&run.solution, tamper_index);
    let tamper_rejected = !verify_serial(&inst, &bad)?.is_accept();
    let segments = run.trace.as_ref().map_or(0, |tr| tr.segments.len());
    Ok(Trial {
        accepted,
        depth: run.depth,
        segments,
        tamper_index,
        tamper_rejected,
    })
}

/// Honest CQ chains for the `d`-serial lifting and one single-step tamper per
/// chain.
pub fn serial_experiment(cfg: &SerialConfig) -> Result<SerialReport> {
    if cfg.trials == 0 {
        return Err(Error::param("at least one trial is needed"));
    }
    let results: Vec<Trial> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, t))
        .collect::<Result<_>>()?;
    let n = results.len() as u64;
    let mut tamper_indices = vec![0; cfg.d + 1];
    for r in &results {
        tamper_indices[r.tamper_index] += 1;
    }
    Ok(SerialReport {
        experiment: "serial".into(),
        config: *cfg,
        product_bound: serial_product_bound(cfg.lambda, cfg.d + 1)?,
        honest: Proportion::new(results.iter().filter(|r| r.accepted).count() as u64, n),
        max_depth: results.iter().map(|r| r.depth).max().unwrap_or(0),
        max_segments: results.iter().map(|r| r.segments).max().unwrap_or(0),
        tamper_rejected: Proportion::new(results.iter().filter(|r| r.tamper_rejected).count() as u64, n),
        tamper_indices,
    })
}
