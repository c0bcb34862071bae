use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::{Backend, DepthBudget};
use crate::oracle::QueryLog;
use crate::problems::collision::{claw_parity, verify_with_table};
use crate::problems::constants::{c_for_lambda, chernoff_lower_bound, random_guess_bound, rational_to_f64};
use crate::problems::{CollisionInstance, CollisionSolution, ENUM_CAP};
use crate::provers::{
    classical_adversary, honest_collision_prover, run_collision_program, AdversaryKind, ProverBackend,
};
use crate::seed::Seed;
use crate::stats::{sigma, tv_counts, Proportion};

/// Trials that also run the budget-limited attempt.
const BUDGET_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionConfig {
    pub lambda: usize,
    /// Lifting depth of the equation oracle.
    pub d: usize,
    pub trials: usize,
    pub seed: Seed,
    pub backend: ProverBackend,
}

impl CollisionConfig {
    pub fn new(lambda: usize, d: usize, trials: usize, seed: Seed) -> Self {
        CollisionConfig {
            lambda,
            d,
            trials,
            seed,
            backend: ProverBackend::StructuredBranch,
        }
    }

    pub fn instance(&self, trial: u64) -> Result<CollisionInstance> {
        let seed = self.seed.trial(trial).role("instance");
        CollisionInstance::new(seed, self.lambda, &BitString::empty())?.lift_recursive(self.d)
    }
}

/// Honest repetitions whose image has exactly two preimages, and how many of
/// those break `m = r·(x₀⊕x₁) ⊕ E(x₀) ⊕ E(x₁)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interference {
    pub repetitions: u64,
    pub two_preimage: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthCheck {
    pub max_depth: usize,
    /// `3 + (2d + 1)`.
    pub bound: usize,
    /// Runs of the same program under a depth-`d` budget.
    pub budget_trials: u64,
    pub budget_exceeded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub experiment: String,
    pub config: CollisionConfig,
    pub c: f64,
    pub chernoff_lower_bound: f64,
    pub random_guess_bound: f64,
    /// `random_guess_bound + 3σ` at this trial count.
    pub random_guess_limit: f64,
    pub honest: Proportion,
    pub random_guess: Proportion,
    pub interference: Interference,
    pub depth: DepthCheck,
}

impl CollisionReport {
    pub fn completeness_ok(&self) -> bool {
        self.honest.rate >= self.chernoff_lower_bound
    }

    pub fn random_guess_ok(&self) -> bool {
        self.random_guess.rate <= self.random_guess_limit
    }

    pub fn depth_ok(&self) -> bool {
        self.depth.max_depth <= self.depth.bound && self.depth.budget_exceeded == self.depth.budget_trials
    }
}

/// Runs the honest program for `λ` repetitions under a depth-`d` budget;
/// `true` when the run stops with `BudgetExceeded`.
pub fn budgeted_attempt<R: Rng + ?Sized>(inst: &CollisionInstance, d: usize, rng: &mut R) -> Result<bool> {
    match run_collision_program(inst, inst.lambda(), DepthBudget::single(d), Backend::Sparse, rng) {
        Ok(_) => Ok(false),
        Err(Error::BudgetExceeded { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

fn interference(inst: &CollisionInstance, pre: &[Vec<u64>], sol: &CollisionSolution) -> Result<Interference> {
    let n = inst.lambda() + 1;
    let mut out = Interference {
        repetitions: sol.triples.len() as u64,
        ..Default::default()
    };
    for t in &sol.triples {
        let p = &pre[t.y.to_u64() as usize];
        if p.len() != 2 {
            continue;
        }
        out.two_preimage += 1;
        let (z0, z1) = (BitString::from_u64(p[0], n), BitString::from_u64(p[1], n));
        if claw_parity(inst.equation(), &z0, &z1, &t.r)? != t.m {
            out.violations += 1;
        }
    }
    Ok(out)
}

struct Trial {
    honest: bool,
    guess: bool,
    interference: Interference,
    depth: usize,
    budget: Option<bool>,
}

fn trial(cfg: &CollisionConfig, t: u64) -> Result<Trial> {
    let inst = cfg.instance(t)?;
    let seed = cfg.seed.trial(t);
    let table = inst.g_table()?;
    let pre = table.preimages(ENUM_CAP)?;
    let run = honest_collision_prover(&inst, cfg.backend, &mut seed.role("honest").rng())?;
    let honest = verify_with_table(&inst, &table, &run.solution, &mut QueryLog::new())?.is_accept();
    let (guess, _) = classical_adversary(AdversaryKind::RandomGuess, &inst, &mut seed.role("random-guess").rng())?;
    let guess = verify_with_table(&inst, &table, &guess, &mut QueryLog::new())?.is_accept();
    let budget = if (t as usize) < BUDGET_TRIALS {
        Some(budgeted_attempt(&inst, cfg.d, &mut seed.role("budget").rng())?)
    } else {
        None
    };
    Ok(Trial {
        honest,
        guess,
        interference: interference(&inst, &pre, &run.solution)?,
        depth: run.depth,
        budget,
    })
}

/// Honest and random-guess acceptance, the interference law on every honest
/// repetition, and the depth ledger, over `cfg.trials` fresh instances.
pub fn honest_collision_experiment(cfg: &CollisionConfig) -> Result<CollisionReport> {
    if cfg.trials == 0 {
        return Err(Error::param("at least one trial is needed"));
    }
    let results: Vec<Trial> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, t))
        .collect::<Result<_>>()?;
    let n = results.len() as u64;
    let c = rational_to_f64(&c_for_lambda(cfg.lambda)?)?;
    let rg = random_guess_bound(cfg.lambda, c);
    let count = |f: &dyn Fn(&Trial) -> bool| results.iter().filter(|r| f(r)).count() as u64;
    let mut inter = Interference::default();
    for r in &results {
        inter.repetitions += r.interference.repetitions;
        inter.two_preimage += r.interference.two_preimage;
        inter.violations += r.interference.violations;
    }
    Ok(CollisionReport {
        experiment: "honest-collision".into(),
        config: *cfg,
        c,
        chernoff_lower_bound: chernoff_lower_bound(c, cfg.lambda),
        random_guess_bound: rg,
        random_guess_limit: rg + 3.0 * sigma(rg, n),
        honest: Proportion::new(count(&|r| r.honest), n),
        random_guess: Proportion::new(count(&|r| r.guess), n),
        interference: inter,
        depth: DepthCheck {
            max_depth: results.iter().map(|r| r.depth).max().unwrap_or(0),
            bound: 3 + 2 * cfg.d + 1,
            budget_trials: count(&|r| r.budget.is_some()),
            budget_exceeded: count(&|r| r.budget == Some(true)),
        },
    })
}

/// Coarse class of one repetition outcome: `min(|g⁻¹(y)|, 3)` and one bit,
/// the claw equation for two preimages and the parity of `r` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeClass {
    pub preimages: usize,
    pub bit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub lambda: usize,
    pub shots: usize,
    /// `(class, dense count, structured count)`.
    pub classes: Vec<(OutcomeClass, u64, u64)>,
    pub tv: f64,
}

fn classify(inst: &CollisionInstance, pre: &[Vec<u64>], sol: &CollisionSolution) -> Result<Vec<OutcomeClass>> {
    let n = inst.lambda() + 1;
    sol.triples
        .iter()
        .map(|t| {
            let p = &pre[t.y.to_u64() as usize];
            let bit = if p.len() == 2 {
                let (z0, z1) = (BitString::from_u64(p[0], n), BitString::from_u64(p[1], n));
                claw_parity(inst.equation(), &z0, &z1, &t.r)? == t.m
            } else {
                t.r.count_ones() % 2 == 1
            };
            Ok(OutcomeClass {
                preimages: p.len().min(3),
                bit,
            })
        })
        .collect()
}

/// Samples `shots` repetitions of the unlifted honest prover on one instance
/// with the full state-vector backend and with the structured backend, and
/// compares the outcome-class distributions.
pub fn backend_cross_check(lambda: usize, shots: usize, seed: Seed) -> Result<CrossCheckReport> {
    if shots == 0 {
        return Err(Error::param("at least one shot is needed"));
    }
    let inst = CollisionInstance::new(seed.role("instance"), lambda, &BitString::empty())?;
    let pre = inst.g_table()?.preimages(ENUM_CAP)?;
    let runs = shots.div_ceil(lambda);
    let mut counts: Vec<HashMap<OutcomeClass, u64>> = Vec::new();
    for (role, backend) in [
        ("dense", ProverBackend::FullStatevector),
        ("structured", ProverBackend::StructuredBranch),
    ] {
        let classes: Vec<Vec<OutcomeClass>> = (0..runs as u64)
            .into_par_iter()
            .map(|i| {
                let run = honest_collision_prover(&inst, backend, &mut seed.trial(i).role(role).rng())?;
                classify(&inst, &pre, &run.solution)
            })
            .collect::<Result<_>>()?;
        let mut m = HashMap::new();
        for c in classes.into_iter().flatten().take(shots) {
            *m.entry(c).or_insert(0u64) += 1;
        }
        counts.push(m);
    }
    let mut keys: Vec<OutcomeClass> = counts.iter().flat_map(|m| m.keys().copied()).collect();
    keys.sort();
    keys.dedup();
    let classes = keys
        .iter()
        .map(|k| {
            (
                *k,
                counts[0].get(k).copied().unwrap_or(0),
                counts[1].get(k).copied().unwrap_or(0),
            )
        })
        .collect();
    Ok(CrossCheckReport {
        lambda,
        shots,
        classes,
        tv: tv_counts(&counts[0], &counts[1]),
    })
}
