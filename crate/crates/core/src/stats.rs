//! Small statistics helpers for Monte-Carlo checks.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

/// Two-sided z for 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A counted proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (lo, hi) = wilson(successes, trials, Z95);
        let rate = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Proportion {
            successes,
            trials,
            rate,
            wilson_lo: lo,
            wilson_hi: hi,
        }
    }
}

pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard deviation of a sample proportion with true rate `p` over `n` draws.
pub fn sigma(p: f64, n: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Critical value of chi-square with `dof` degrees of freedom at significance `alpha`.
pub fn chi_square_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64).expect("dof > 0").inverse_cdf(1.0 - alpha)
}

pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    Binomial::new(p, n).expect("valid binomial").pmf(k)
}

/// `Pr[Bin(n, p) >= k]`.
pub fn binomial_tail_ge(n: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let b = Binomial::new(p, n).expect("valid binomial");
    (k..=n).map(|j| b.pmf(j)).sum::<f64>().min(1.0)
}

/// Pearson correlation; `0.0` when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Total-variation distance between two empirical distributions.
pub fn tv_counts<K: Eq + Hash + Clone>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let mut keys: Vec<&K> = a.keys().collect();
    keys.extend(b.keys().filter(|k| !a.contains_key(*k)));
    let half: f64 = keys
        .into_iter()
        .map(|k| {
            let pa = *a.get(k).unwrap_or(&0) as f64 / na.max(1) as f64;
            let pb = *b.get(k).unwrap_or(&0) as f64 / nb.max(1) as f64;
            (pa - pb).abs()
        })
        .sum();
    half / 2.0
}

/// Total-variation distance between two probability vectors over the same index set.
pub fn tv_dense(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_rate() {
        let (lo, hi) = wilson(30, 100, Z95);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3, "{lo}");
        assert!((hi - 0.3958).abs() < 1e-3, "{hi}");
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn binomial_tail_matches_direct_sum() {
        // Pr[Bin(4, 1/2) >= 3] = 5/16
        assert!((binomial_tail_ge(4, 0.5, 3) - 5.0 / 16.0).abs() < 1e-12);
        assert_eq!(binomial_tail_ge(4, 0.5, 0), 1.0);
        assert_eq!(binomial_tail_ge(4, 0.5, 5), 0.0);
    }

    #[test]
    fn chi_square_critical_known_value() {
        // 1 dof at alpha = 0.05 is 3.8415
        assert!((chi_square_critical(1, 0.05) - 3.841_458_8).abs() < 1e-4);
    }

    #[test]
    fn tv_of_identical_is_zero() {
        let mut a = HashMap::new();
        a.insert(1, 5u64);
        a.insert(2, 5u64);
        assert_eq!(tv_counts(&a, &a), 0.0);
        let mut b = HashMap::new();
        b.insert(3, 7u64);
        assert_eq!(tv_counts(&a, &b), 1.0);
    }
}
