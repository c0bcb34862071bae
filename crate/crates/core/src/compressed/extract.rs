//! Two-continuation collision extraction against tiny h-CollisionHashing
//! instances, with `H` simulated by the compressed oracle.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::TruthTable;
use crate::problems::HCollisionInstance;
use crate::qsim::{register_value, Gate, C64};
use crate::seed::Seed;
use crate::stats::Proportion;

use super::state::CompressedState;

/// Largest `λ` the extractor will simulate.
pub const MAX_LAMBDA: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractTarget {
    /// The honest QC solver: per repetition, superpose `b‖x`, query `G`,
    /// measure `y`, compute `t = h(y)` classically, then one phase query to
    /// `H(x‖t)`.
    HonestQc,
    /// Same as the honest solver without the `H` query.
    NeverQueriesH,
}

impl ExtractTarget {
    fn h_queries(self, lambda: usize) -> usize {
        match self {
            ExtractTarget::HonestQc => lambda,
            ExtractTarget::NeverQueriesH => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub lambda: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: Seed,
    pub target: ExtractTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClawPoint {
    pub b: u8,
    pub x: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    pub trial: u64,
    /// Index of the `H_d` query the run stopped before, from 1.
    pub i: usize,
    pub j: usize,
    pub j_prime: usize,
    pub y_tilde: u64,
    pub left: ClawPoint,
    pub right: ClawPoint,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub experiment: String,
    pub config: ExtractConfig,
    /// Trials with at least one emitted pair.
    pub nonempty: Proportion,
    pub emissions: Vec<Emission>,
    pub all_verified: bool,
    pub g_queries: u64,
    /// Mean `|D|` of the compressed `H` database at the end of each continuation.
    pub mean_db_size: f64,
}

/// Qubits of one repetition: `b`, `x`, `y`, `z`.
struct RepLayout {
    lambda: usize,
}

impl RepLayout {
    fn bx(&self) -> Vec<usize> {
        (0..=self.lambda).collect()
    }

    fn x(&self) -> Vec<usize> {
        (1..=self.lambda).collect()
    }

    fn y(&self) -> Vec<usize> {
        (self.lambda + 1..=2 * self.lambda).collect()
    }

    fn z(&self) -> usize {
        2 * self.lambda + 1
    }

    fn qubits(&self) -> usize {
        2 * self.lambda + 2
    }
}

struct Tables {
    g0: TruthTable,
    g1: TruthTable,
}

impl Tables {
    fn g(&self, bx: u64, lambda: usize) -> u64 {
        let x = bx & ((1 << lambda) - 1);
        if bx >> lambda & 1 == 1 {
            self.g1.get(x)
        } else {
            self.g0.get(x)
        }
    }
}

/// Runs one repetition up to and including the measurement of `y`.
fn prepare_rep<R: Rng + ?Sized>(lay: &RepLayout, tables: &Tables, rng: &mut R) -> Result<(CompressedState, u64)> {
    let l = lay.lambda;
    let mut s = CompressedState::new(2 * l, 1, lay.qubits())?;
    for q in lay.bx() {
        s.apply_gate(&Gate::h(q));
    }
    s.apply_gate(&Gate::x(lay.z()));
    s.apply_xor(&lay.bx(), &lay.y(), &|bx| tables.g(bx, l));
    let ys = lay.y();
    let y = s.measure(1 << l, &|a| register_value(a, &ys) as usize, rng) as u64;
    Ok((s, y))
}

/// `H_{d−1} ∘ … ∘ H_0 (y)`, the input of the final stage.
fn last_stage_input(inst: &HCollisionInstance, y: u64) -> Result<BitString> {
    let stages = inst.h().stages();
    let mut v = BitString::from_u64(y, inst.lambda());
    for s in &stages[..stages.len() - 1] {
        v = s.eval(&v)?;
    }
    Ok(v)
}

/// One continuation: the `j`-th remaining `H` query, answered by
/// `O^H_{ỹ,c0,c1}` in place, then a measurement of its input register.
fn continuation<R: Rng + ?Sized>(
    lay: &RepLayout,
    state: &CompressedState,
    t: u64,
    y_tilde: u64,
    c: (u8, u8),
    tables: &Tables,
    rng: &mut R,
) -> (u64, f64) {
    let l = lay.lambda;
    let (xs, z) = (lay.x(), lay.z());
    let mut s = state.clone();
    // 0: G0(x) = ỹ, 1: G1(x) = ỹ, 2: neither; computed from one query to each.
    let case = |a: u64| {
        let x = register_value(a, &xs);
        if tables.g0.get(x) == y_tilde {
            0
        } else if tables.g1.get(x) == y_tilde {
            1
        } else {
            2
        }
    };
    let zbit = |a: u64| a >> z & 1;
    s.apply_diagonal(&|a| {
        let flip = match case(a) {
            0 => c.0 as u64 & zbit(a),
            1 => c.1 as u64 & zbit(a),
            _ => 0,
        };
        C64::new(if flip == 1 { -1.0 } else { 1.0 }, 0.0)
    });
    s.cpho_query_where(&|a| register_value(a, &xs) << l | t, &zbit, &|a| case(a) == 2);
    let sizes = s.db_size_distribution();
    let mean = sizes.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let x = s.measure(1 << l, &|a| register_value(a, &xs) as usize, rng) as u64;
    (x, mean)
}

fn claw_point(tables: &Tables, x: u64, y: u64) -> Option<ClawPoint> {
    if tables.g0.get(x) == y {
        Some(ClawPoint { b: 0, x })
    } else if tables.g1.get(x) == y {
        Some(ClawPoint { b: 1, x })
    } else {
        None
    }
}

/// Exact recheck against the oracles themselves.
fn verify_claw(inst: &HCollisionInstance, y: u64, p: ClawPoint, q: ClawPoint) -> bool {
    let g = |p: ClawPoint| {
        if p.b == 0 {
            inst.g0().eval_u64(p.x)
        } else {
            inst.g1().eval_u64(p.x)
        }
    };
    p != q && g(p) == y && g(q) == y
}

struct TrialOutcome {
    emission: Option<Emission>,
    g_queries: u64,
    db_sizes: Vec<f64>,
}

fn trial(cfg: &ExtractConfig, t: u64) -> Result<TrialOutcome> {
    let l = cfg.lambda;
    let seed = cfg.seed.trial(t);
    let inst = HCollisionInstance::new(seed.role("instance"), l, cfg.d, &BitString::empty())?;
    let (g0, g1) = inst.tables()?;
    let tables = Tables { g0, g1 };
    let lay = RepLayout { lambda: l };
    let mut rng = seed.role("extract").rng();

    // (i)-(ii): every repetition measures y and computes t = h(y) classically;
    // the run stops just before the i-th H_d query.
    let mut reps = Vec::with_capacity(l);
    for _ in 0..l {
        reps.push(prepare_rep(&lay, &tables, &mut rng)?);
    }
    let i = rng.random_range(0..l);
    let ts: Vec<u64> = reps
        .iter()
        .map(|(_, y)| inst.h().eval(&BitString::from_u64(*y, l)).map(|v| v.to_u64()))
        .collect::<Result<_>>()?;
    let z = last_stage_input(&inst, reps[i].1)?;
    let target = inst.h().stages().last().expect("at least one stage").eval(&z)?.to_u64();

    // (iii): ỹ from h^{-1}(H_d(z)), found by evaluating h everywhere.
    let data: Vec<u64> = (0..1u64 << l)
        .filter_map(|y| match inst.h().eval(&BitString::from_u64(y, l)) {
            Ok(v) if v.to_u64() == target => Some(Ok(y)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;
    let y_tilde = data[rng.random_range(0..data.len())];
    let c: [u8; 4] = std::array::from_fn(|_| rng.random_range(0..2));
    let remaining = cfg.target.h_queries(l);
    if remaining == 0 {
        return Ok(TrialOutcome {
            emission: None,
            g_queries: 0,
            db_sizes: Vec::new(),
        });
    }
    let (j, jp) = (rng.random_range(1..=remaining), rng.random_range(1..=remaining));

    // (iv)-(vi): two continuations from cloned copies of the snapshot; the j-th
    // remaining H query is repetition j − 1's.
    let (s, _) = &reps[j - 1];
    let (x, db) = continuation(&lay, s, ts[j - 1], y_tilde, (c[0], c[1]), &tables, &mut rng);
    let (sp, _) = &reps[jp - 1];
    let (xp, dbp) = continuation(&lay, sp, ts[jp - 1], y_tilde, (c[2], c[3]), &tables, &mut rng);

    let emission = match (claw_point(&tables, x, y_tilde), claw_point(&tables, xp, y_tilde)) {
        (Some(left), Some(right)) if x != xp => Some(Emission {
            trial: t,
            i: i + 1,
            j,
            j_prime: jp,
            y_tilde,
            left,
            right,
            verified: verify_claw(&inst, y_tilde, left, right),
        }),
        _ => None,
    };
    Ok(TrialOutcome {
        emission,
        g_queries: 4,
        db_sizes: vec![db, dbp],
    })
}

/// Runs the extractor for `cfg.trials` independent instances and keeps only
/// pairs that recheck as `G`-collisions.
pub fn extract_collision(cfg: &ExtractConfig) -> Result<ExtractReport> {
    if cfg.lambda == 0 || cfg.lambda > MAX_LAMBDA {
        return Err(Error::CapExceeded {
            what: "extractor lambda",
            needed: cfg.lambda,
            cap: MAX_LAMBDA,
        });
    }
    if cfg.trials == 0 {
        return Err(Error::param("at least one trial is needed"));
    }
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, t))
        .collect::<Result<_>>()?;
    let candidates: Vec<Emission> = outcomes.iter().filter_map(|o| o.emission.clone()).collect();
    let all_verified = candidates.iter().all(|e| e.verified);
    let emissions: Vec<Emission> = candidates.into_iter().filter(|e| e.verified).collect();
    let sizes: Vec<f64> = outcomes.iter().flat_map(|o| o.db_sizes.iter().copied()).collect();
    Ok(ExtractReport {
        experiment: "extract".into(),
        config: cfg.clone(),
        nonempty: Proportion::new(emissions.len() as u64, cfg.trials as u64),
        all_verified,
        g_queries: outcomes.iter().map(|o| o.g_queries).sum(),
        mean_db_size: if sizes.is_empty() {
            0.0
        } else {
            sizes.iter().sum::<f64>() / sizes.len() as f64
        },
        emissions,
    })
}
