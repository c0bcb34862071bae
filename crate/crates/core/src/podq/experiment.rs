//! Completeness and baseline-failure experiments over many protocol runs.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::{
    run_cqc, Backend, ClassicalOracles, CqAction, CqAsCqc, CqStrategy, DepthBudget, QProgram, RunOptions,
};
use crate::problems::constants::{c_for_lambda, chernoff_lower_bound, random_guess_bound, rational_to_f64};
use crate::problems::{CollisionInstance, CollisionSolution, ProblemKind};
use crate::provers::{classical_adversary, collision_program, AdversaryKind, ProverBackend};
use crate::seed::Seed;
use crate::stats::Proportion;

use super::{gen, prove, verify, KeyMode, Proof, TranscriptConfig, SCHEMA_VERSION};

pub const EVIDENCE_NOTE: &str =
    "empirical soundness evidence: budget enforcement and baseline failure, not a soundness proof";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lambda: usize,
    pub d: usize,
    pub problem: ProblemKind,
    pub seed: Seed,
    pub trials: usize,
    pub mode: KeyMode,
    pub backend: ProverBackend,
    /// Classical `g` queries granted to the query-strategy baseline.
    pub adversary_queries: usize,
}

impl ExperimentConfig {
    pub fn new(lambda: usize, d: usize, trials: usize, seed: Seed) -> Self {
        ExperimentConfig {
            lambda,
            d,
            problem: ProblemKind::CollisionHashing,
            seed,
            trials,
            mode: KeyMode::Salted,
            backend: ProverBackend::StructuredBranch,
            adversary_queries: 1 << (lambda / 2 + 2),
        }
    }

    pub fn transcript_config(&self) -> Result<TranscriptConfig> {
        TranscriptConfig::new(self.lambda, self.d, self.problem, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProverKind {
    Honest,
    RandomGuess,
    QueryStrategy,
    /// Coherent stage-by-stage evaluation under a CQC_d budget.
    CqcBudgeted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProverReport {
    pub prover: ProverKind,
    pub acceptance: Proportion,
    /// Largest quantum depth over all trials.
    pub max_quantum_depth: usize,
    pub mean_classical_queries: f64,
    pub budget_exceeded: u64,
}

/// Pre-computed acceptance bounds for CollisionHashing at this `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub c: f64,
    pub chernoff_lower_bound: f64,
    pub random_guess_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub thresholds: Option<Thresholds>,
    pub provers: Vec<ProverReport>,
    pub evidence: String,
}

impl ExperimentReport {
    pub fn prover(&self, kind: ProverKind) -> Option<&ProverReport> {
        self.provers.iter().find(|p| p.prover == kind)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    accepted: bool,
    depth: usize,
    queries: usize,
    budget_exceeded: bool,
}

/// Runs the honest lifted program as one CQ segment under budget `budget`.
struct CoherentAttempt {
    program: Option<QProgram>,
}

impl CqStrategy for CoherentAttempt {
    fn step(&mut self, last: Option<&BitString>, _: &mut ClassicalOracles<'_>) -> Result<CqAction> {
        Ok(match self.program.take() {
            Some(p) => CqAction::Run(p),
            None => CqAction::Finish(last.cloned().unwrap_or_default()),
        })
    }
}

/// A CQC_d prover that tries to evaluate the lifted equation oracle coherently,
/// one stage per round, inside a segment of depth `d`. The program needs depth
/// `2d + 4`, so the run stops with `BudgetExceeded`.
pub fn cqc_coherent_attempt<R: Rng + ?Sized>(
    inst: &CollisionInstance,
    segments: usize,
    rng: &mut R,
) -> Result<CollisionSolution> {
    let d = inst
        .lift_depth()
        .ok_or_else(|| Error::param("the coherent attempt needs a lifted instance"))?;
    let (program, lay) = collision_program(inst, inst.lambda());
    let mut s = CqAsCqc(CoherentAttempt { program: Some(program) });
    let budget = DepthBudget::new(d, segments.max(1), false)?;
    let opts = RunOptions {
        backend: Backend::Sparse,
        query_budget: None,
    };
    let trace = run_cqc(budget, &mut s, &inst.oracles(), opts, rng)?;
    Ok(CollisionSolution {
        triples: lay.decode(&trace.output),
    })
}

fn trial(cfg: &ExperimentConfig, tc: &TranscriptConfig, t: u64) -> Result<Vec<Outcome>> {
    let seed = cfg.seed.trial(t);
    let keys = gen(cfg.lambda, cfg.mode, &mut seed.role("gen").rng())?;
    let mut out = Vec::with_capacity(4);

    let honest = prove(&keys.pk, tc, cfg.backend, &mut seed.role("honest").rng())?;
    let rec = verify(&keys, &keys.pk, &honest.proof, tc)?;
    out.push(Outcome {
        accepted: rec.verdict.is_accept(),
        depth: honest.depth.prover_quantum_depth,
        queries: honest.classical_queries,
        budget_exceeded: false,
    });
    if tc.problem != ProblemKind::CollisionHashing {
        return Ok(out);
    }

    let inst = tc.collision_instance(&keys.pk)?;
    for (role, kind) in [
        ("random-guess", AdversaryKind::RandomGuess),
        (
            "query-strategy",
            AdversaryKind::QueryStrategy {
                budget: cfg.adversary_queries,
            },
        ),
    ] {
        let (sol, log) = classical_adversary(kind, &inst, &mut seed.role(role).rng())?;
        let rec = verify(&keys, &keys.pk, &Proof::CollisionHashing(sol), tc)?;
        out.push(Outcome {
            accepted: rec.verdict.is_accept(),
            depth: 0,
            queries: log.len(),
            ..Default::default()
        });
    }

    let attempt = match cqc_coherent_attempt(&inst, cfg.lambda, &mut seed.role("cqc").rng()) {
        Ok(sol) => {
            let rec = verify(&keys, &keys.pk, &Proof::CollisionHashing(sol), tc)?;
            Outcome {
                accepted: rec.verdict.is_accept(),
                depth: inst.lift_depth().unwrap_or(0),
                ..Default::default()
            }
        }
        Err(Error::BudgetExceeded { d, .. }) => Outcome {
            depth: d,
            budget_exceeded: true,
            ..Default::default()
        },
        Err(e) => return Err(e),
    };
    out.push(attempt);
    Ok(out)
}

/// gen, prove and verify per trial for the honest prover and each baseline.
/// Trials run in parallel; each draws from its own seed so the report does
/// not depend on scheduling.
pub fn experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::param("at least one trial is needed"));
    }
    let tc = cfg.transcript_config()?;
    let results: Vec<Vec<Outcome>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, &tc, t))
        .collect::<Result<_>>()?;
    let kinds: &[ProverKind] = if cfg.problem == ProblemKind::CollisionHashing {
        &[
            ProverKind::Honest,
            ProverKind::RandomGuess,
            ProverKind::QueryStrategy,
            ProverKind::CqcBudgeted,
        ]
    } else {
        &[ProverKind::Honest]
    };
    let n = results.len() as u64;
    let provers = kinds
        .iter()
        .enumerate()
        .map(|(i, &prover)| {
            let col = results.iter().map(|r| r[i]);
            ProverReport {
                prover,
                acceptance: Proportion::new(col.clone().filter(|o| o.accepted).count() as u64, n),
                max_quantum_depth: col.clone().map(|o| o.depth).max().unwrap_or(0),
                mean_classical_queries: col.clone().map(|o| o.queries as f64).sum::<f64>() / n as f64,
                budget_exceeded: col.filter(|o| o.budget_exceeded).count() as u64,
            }
        })
        .collect();
    let thresholds = if cfg.problem == ProblemKind::CollisionHashing {
        let c = rational_to_f64(&c_for_lambda(cfg.lambda)?)?;
        Some(Thresholds {
            c,
            chernoff_lower_bound: chernoff_lower_bound(c, cfg.lambda),
            random_guess_bound: random_guess_bound(cfg.lambda, c),
        })
    } else {
        None
    };
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        experiment: "podq".into(),
        config: cfg.clone(),
        thresholds,
        provers,
        evidence: EVIDENCE_NOTE.into(),
    })
}
