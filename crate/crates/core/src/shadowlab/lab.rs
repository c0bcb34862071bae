//! Monte-Carlo runs of the set constructions over fresh oracles.

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{compose_recursive, ComposedOracle, RandomOracle};
use crate::seed::Seed;
use crate::stats::{sigma, Proportion};

use super::sets::{
    contains, gen_base_sets, gen_set_matrix, gen_set_row_qc, is_subset, BaseSets, PathQueries, SetMatrix,
};
use super::shadow::trace_qnc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowlabConfig {
    /// `|Σ| = 2^sigma_bits`.
    pub sigma_bits: usize,
    pub d: usize,
    pub trials: usize,
    /// Leading trials that also run the exclusion variant.
    pub qc_trials: usize,
    /// Number of stage-1 path queries excluded per exclusion run.
    pub t_sizes: Vec<usize>,
    pub seed: Seed,
}

impl ShadowlabConfig {
    pub fn new(sigma_bits: usize, d: usize, trials: usize, seed: Seed) -> Self {
        ShadowlabConfig {
            sigma_bits,
            d,
            trials,
            qc_trials: trials.min(2000),
            t_sizes: vec![0, 4, 16],
            seed,
        }
    }

    pub fn alphabet(&self) -> usize {
        1 << self.sigma_bits
    }

    pub fn oracle(&self, trial: u64) -> Result<ComposedOracle> {
        let root = RandomOracle::root(self.seed.trial(trial).role("oracle"), "shadowlab");
        compose_recursive(&root, self.sigma_bits, self.d, self.sigma_bits)
    }
}

/// Hit rate of a uniform point of `S_{i-1,k}` in `S_{ik}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindCell {
    pub i: usize,
    pub k: usize,
    pub hits: Proportion,
    /// `1/|Σ| + 3σ`.
    pub limit: f64,
}

/// Hit rate of a uniform unqueried point of `S_{0k}` in `S_{1k}` after
/// excluding `t_size` path queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcCell {
    pub t_size: usize,
    pub k: usize,
    pub hits: Proportion,
    /// Mean of `|S_{1k}| / |S_{0k} \ T_{1k}|` over the runs.
    pub bound: f64,
    /// `bound + 3σ`.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowlabReport {
    pub experiment: String,
    pub config: ShadowlabConfig,
    pub abort: Proportion,
    /// `(d+1)/|Σ|`.
    pub abort_bound: f64,
    /// `abort_bound + 3σ`.
    pub abort_limit: f64,
    pub find: Vec<FindCell>,
    pub qc: Vec<QcCell>,
    /// Non-aborted runs whose containment chain and sizes held exactly.
    pub exact_runs: u64,
    pub exclusions_respected: bool,
    pub blocking_as_expected: bool,
    pub final_values_seen: u64,
}

impl ShadowlabReport {
    pub fn abort_ok(&self) -> bool {
        self.abort.rate <= self.abort_limit
    }

    pub fn find_ok(&self) -> bool {
        self.find.iter().all(|c| c.hits.rate <= c.limit)
    }

    pub fn qc_ok(&self) -> bool {
        self.qc.iter().all(|c| c.hits.rate <= c.limit)
    }

    pub fn structure_ok(&self) -> bool {
        self.exact_runs == self.abort.trials - self.abort.successes
            && self.exclusions_respected
            && self.blocking_as_expected
            && self.final_values_seen == 0
    }
}

#[derive(Default)]
struct TrialResult {
    aborted: bool,
    exact: bool,
    /// `(i, k, hit)`.
    find: Vec<(usize, usize, bool)>,
    /// `(t_size, k, hit, bound)`.
    qc: Vec<(usize, usize, bool, f64)>,
    exclusions_respected: bool,
    blocking_as_expected: bool,
    final_values_seen: u64,
}

fn exact_structure(b: &BaseSets, m: &SetMatrix, sigma: usize) -> bool {
    let d = b.d;
    let n = sigma.pow(d as u32 + 2);
    (1..=d).all(|i| {
        is_subset(b.s(i), m.get(i, i))
            && is_subset(m.get(i, i), m.get(i - 1, i))
            && is_subset(m.get(i - 1, i), b.s0(i))
            && (1..=d).all(|k| {
                let s = m.get(i, k);
                if k < i {
                    s.is_empty()
                } else {
                    s.len() == n / sigma.pow(i as u32)
                }
            })
    })
}

fn trial(cfg: &ShadowlabConfig, t: u64) -> Result<TrialResult> {
    let c = cfg.oracle(t)?;
    let mut rng = cfg.seed.trial(t).role("sets").rng();
    let b = gen_base_sets(&c, &mut rng)?;
    if b.aborted() {
        return Ok(TrialResult {
            aborted: true,
            exclusions_respected: true,
            blocking_as_expected: true,
            ..Default::default()
        });
    }
    let sigma = cfg.alphabet();
    let m = gen_set_matrix(&b, &c, &mut rng)?;
    let mut r = TrialResult {
        exact: exact_structure(&b, &m, sigma),
        exclusions_respected: true,
        ..Default::default()
    };
    for i in 1..=cfg.d {
        for k in i..=cfg.d {
            let x = *m.get(i - 1, k).choose(&mut rng).expect("nonempty set");
            r.find.push((i, k, contains(m.get(i, k), x)));
        }
    }
    let trace = trace_qnc(&c, &b.sigma_paths, &m)?;
    r.blocking_as_expected = trace.blocking_as_expected && trace.deepest_level == cfg.d;
    r.final_values_seen = trace.final_values_seen as u64;

    if (t as usize) < cfg.qc_trials {
        let sigma_points: Vec<u64> = (0..sigma as u64).collect();
        let outside: Vec<u64> = b.s0(1).iter().copied().filter(|&x| !contains(b.s(1), x)).collect();
        for &size in &cfg.t_sizes {
            let t0: Vec<u64> = sigma_points
                .choose_multiple(&mut rng, (size / 4).min(sigma))
                .copied()
                .collect();
            let extra: Vec<u64> = outside.choose_multiple(&mut rng, size - t0.len()).copied().collect();
            let paths = PathQueries::from_points(&c, &t0, &extra)?;
            let row = gen_set_row_qc(&b, &c, m.row(0), 1, &paths, &mut rng)?;
            r.exclusions_respected &= paths.t(1).iter().all(|&x| !contains(&row[0], x));
            for k in 1..=cfg.d {
                let free: Vec<u64> = b.s0(k).iter().copied().filter(|&x| !contains(paths.t(k), x)).collect();
                let x = *free.choose(&mut rng).expect("nonempty set");
                let bound = row[k - 1].len() as f64 / free.len() as f64;
                r.qc.push((size, k, contains(&row[k - 1], x), bound));
            }
        }
    }
    Ok(r)
}

/// Abort frequency, find probabilities and the structural checks over
/// `cfg.trials` independent oracles.
pub fn run_shadowlab(cfg: &ShadowlabConfig) -> Result<ShadowlabReport> {
    if cfg.trials == 0 || cfg.d == 0 {
        return Err(Error::param("shadowlab needs d ≥ 1 and at least one trial"));
    }
    let results: Vec<TrialResult> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, t))
        .collect::<Result<_>>()?;
    let sigma_size = cfg.alphabet() as f64;
    let n = results.len() as u64;
    let aborts = results.iter().filter(|r| r.aborted).count() as u64;
    let abort_bound = (cfg.d + 1) as f64 / sigma_size;

    let mut find = Vec::new();
    for i in 1..=cfg.d {
        for k in i..=cfg.d {
            let cell: Vec<bool> = results
                .iter()
                .flat_map(|r| r.find.iter())
                .filter(|f| f.0 == i && f.1 == k)
                .map(|f| f.2)
                .collect();
            let hits = Proportion::new(cell.iter().filter(|&&h| h).count() as u64, cell.len() as u64);
            let p = 1.0 / sigma_size;
            find.push(FindCell {
                i,
                k,
                hits,
                limit: p + 3.0 * sigma(p, hits.trials.max(1)),
            });
        }
    }
    let mut qc = Vec::new();
    for &size in &cfg.t_sizes {
        for k in 1..=cfg.d {
            let cell: Vec<(bool, f64)> = results
                .iter()
                .flat_map(|r| r.qc.iter())
                .filter(|q| q.0 == size && q.1 == k)
                .map(|q| (q.2, q.3))
                .collect();
            if cell.is_empty() {
                continue;
            }
            let hits = Proportion::new(cell.iter().filter(|c| c.0).count() as u64, cell.len() as u64);
            let bound = cell.iter().map(|c| c.1).sum::<f64>() / cell.len() as f64;
            qc.push(QcCell {
                t_size: size,
                k,
                hits,
                bound,
                limit: bound + 3.0 * sigma(bound, hits.trials),
            });
        }
    }
    Ok(ShadowlabReport {
        experiment: "shadowlab".into(),
        config: cfg.clone(),
        abort: Proportion::new(aborts, n),
        abort_bound,
        abort_limit: abort_bound + 3.0 * sigma(abort_bound, n),
        find,
        qc,
        exact_runs: results.iter().filter(|r| r.exact).count() as u64,
        exclusions_respected: results.iter().all(|r| r.exclusions_respected),
        blocking_as_expected: results.iter().all(|r| r.aborted || r.blocking_as_expected),
        final_values_seen: results.iter().map(|r| r.final_values_seen).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shadowlab::sets::gen_set_matrix_qc;
    use crate::stats::tv_counts;
    use std::collections::HashMap;

    #[test]
    fn small_run_meets_every_check() {
        let cfg = ShadowlabConfig::new(2, 2, 400, Seed::from_u64(5));
        let r = run_shadowlab(&cfg).unwrap();
        assert!(r.abort_ok(), "{:?}", r.abort);
        assert!(r.find_ok(), "{:?}", r.find);
        assert!(r.qc_ok(), "{:?}", r.qc);
        assert!(r.structure_ok());
        assert_eq!(r.find.len(), 3);
        assert_eq!(r.qc.len(), 6);
    }

    #[test]
    fn exclusion_free_variant_matches_the_plain_construction() {
        // |Σ| = 2, d = 1: S_11 is 4 of the 8 base points, 2 of them forced.
        let cfg = ShadowlabConfig::new(1, 1, 1, Seed::from_u64(1));
        let (c, b) = (0..)
            .find_map(|t| {
                let c = cfg.oracle(t).unwrap();
                let b = gen_base_sets(&c, &mut Seed::from_u64(t).rng()).unwrap();
                (!b.aborted()).then_some((c, b))
            })
            .unwrap();
        let (mut plain, mut qc) = (HashMap::new(), HashMap::new());
        let mut rng = Seed::from_u64(2).rng();
        let none = [PathQueries::none(1)];
        for _ in 0..20_000 {
            *plain
                .entry(gen_set_matrix(&b, &c, &mut rng).unwrap().get(1, 1).to_vec())
                .or_insert(0u64) += 1;
            *qc.entry(gen_set_matrix_qc(&b, &c, &none, &mut rng).unwrap().get(1, 1).to_vec())
                .or_insert(0u64) += 1;
        }
        assert_eq!(plain.len(), 15);
        assert!(tv_counts(&plain, &qc) < 0.05);
    }

    #[test]
    fn abort_rate_is_seeded() {
        let cfg = ShadowlabConfig::new(2, 1, 50, Seed::from_u64(8));
        assert_eq!(run_shadowlab(&cfg).unwrap(), run_shadowlab(&cfg).unwrap());
    }
}
