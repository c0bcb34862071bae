//! Exact and limiting constants, and the pre-computed bounds experiments are
//! judged against.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::stats;

/// `Pr[|g⁻¹(b)| = 2 | b ∈ g(A)]` for a uniform `g: A -> B` and fixed `b`:
/// `C(A,2)·(B−1)^{A−2} / (B^A − (B−1)^A)`.
pub fn c_exact(a: u64, b: u64) -> Result<BigRational> {
    if a < 2 || b < 2 {
        return Err(Error::param(format!("c_exact needs A, B >= 2 (got {a}, {b})")));
    }
    let exp = u32::try_from(a).map_err(|_| Error::param("domain too large"))?;
    let bb = BigInt::from(b);
    let b1 = BigInt::from(b - 1);
    let pairs = BigInt::from(a) * BigInt::from(a - 1) / 2;
    let den = num_traits::pow(bb, exp as usize) - num_traits::pow(b1.clone(), exp as usize);
    // den ≡ 1 mod (B − 1), so only C(A,2) can share factors with it
    let rem: BigInt = &den % &pairs;
    let g = rem.gcd(&pairs);
    let num = (pairs / &g) * num_traits::pow(b1, (exp - 2) as usize);
    Ok(BigRational::new_raw(num, den / g))
}

/// `Pr[|g⁻¹(0)| = 2 | 0 ∈ g(A)]` by enumerating all `B^A` functions.
pub fn c_brute_force(a: u64, b: u64) -> Result<BigRational> {
    let total = u32::try_from(a)
        .ok()
        .and_then(|e| b.checked_pow(e))
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::param(format!("{b}^{a} functions is too many to enumerate")))?;
    if a < 2 || b < 2 {
        return Err(Error::param(format!("c_brute_force needs A, B >= 2 (got {a}, {b})")));
    }
    let (mut hit, mut two) = (0i64, 0i64);
    for code in 0..total {
        let mut v = code;
        let mut count = 0;
        for _ in 0..a {
            if v % b == 0 {
                count += 1;
            }
            v /= b;
        }
        hit += (count > 0) as i64;
        two += (count == 2) as i64;
    }
    Ok(BigRational::new(BigInt::from(two), BigInt::from(hit)))
}

pub fn c_exact_f64(a: u64, b: u64) -> Result<f64> {
    rational_to_f64(&c_exact(a, b)?)
}

/// `c_exact(2^{λ+1}, 2^λ)`, memoised.
pub fn c_for_lambda(lambda: usize) -> Result<BigRational> {
    static CACHE: OnceLock<Mutex<HashMap<usize, BigRational>>> = OnceLock::new();
    if lambda >= 40 {
        return Err(Error::param(format!("lambda {lambda} too large for an exact c")));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&lambda) {
        return Ok(c.clone());
    }
    let c = c_exact(1u64 << (lambda + 1), 1u64 << lambda)?;
    cache.lock().unwrap().insert(lambda, c.clone());
    Ok(c)
}

pub fn rational_to_f64(r: &BigRational) -> Result<f64> {
    if let Some(v) = r.to_f64().filter(|v| v.is_finite()) {
        return Ok(v);
    }
    // scale both sides down for huge numerators/denominators
    let shift = r.denom().bits().saturating_sub(900);
    let n = (r.numer() >> shift).to_f64();
    let d = (r.denom() >> shift).to_f64();
    match (n, d) {
        (Some(n), Some(d)) if d != 0.0 => Ok(n / d),
        _ => Err(Error::param("rational out of f64 range")),
    }
}

/// `k² / (2(e^k − 1))`.
pub fn c_limit(k: u32) -> f64 {
    let k = k as f64;
    k * k / (2.0 * (k.exp() - 1.0))
}

/// The h-CollisionHashing constant `C = c/4 = 1/(2(e² − 1))`.
pub fn capital_c() -> f64 {
    1.0 / (2.0 * (2f64.exp() - 1.0))
}

/// Probability that the image of a uniformly sampled input has exactly two
/// preimages: `(A−1)/B·(1−1/B)^{A−2}`.
pub fn measured_two_preimage_rate(a: u64, b: u64) -> f64 {
    let (af, bf) = (a as f64, b as f64);
    (af - 1.0) / bf * (1.0 - 1.0 / bf).powf(af - 2.0)
}

/// Probability that a uniform point of `B` has exactly two preimages:
/// `C(A,2)/B²·(1−1/B)^{A−2}`.
pub fn uniform_two_preimage_rate(a: u64, b: u64) -> f64 {
    let (af, bf) = (a as f64, b as f64);
    af * (af - 1.0) / 2.0 / (bf * bf) * (1.0 - 1.0 / bf).powf(af - 2.0)
}

/// Probability that `G_b(x)` for uniform `(b, x)` lies in `TwoToOne(G_0, G_1)`
/// when both maps are uniform on `N` points: `((1 − 1/N)^{N−1})²`.
pub fn two_to_one_hit_rate(n: u64) -> f64 {
    let nf = n as f64;
    (1.0 - 1.0 / nf).powf(nf - 1.0).powi(2)
}

/// `E|TwoToOne(G_0, G_1)| / N = ((1 − 1/N)^{N−1})²`.
pub fn two_to_one_density(n: u64) -> f64 {
    two_to_one_hit_rate(n)
}

/// Chernoff lower bound on honest CollisionHashing acceptance with `λ`
/// repetitions succeeding at rate `c`: `1 − exp(−cλ/32)`.
pub fn chernoff_lower_bound(c: f64, lambda: usize) -> f64 {
    1.0 - (-c * lambda as f64 / 32.0).exp()
}

/// Exact acceptance bound for uniformly random CollisionHashing triples:
/// `Σ_k Pr[Bin(λ, q) = k]·[4k > 3cλ]·Pr[Bin(k, ½) > 3k/4]`.
pub fn random_guess_bound(lambda: usize, c: f64) -> f64 {
    let a = 1u64 << (lambda + 1);
    let b = 1u64 << lambda;
    let q = uniform_two_preimage_rate(a, b);
    let n = lambda as u64;
    (0..=n)
        .filter(|&k| 4.0 * k as f64 > 3.0 * c * lambda as f64)
        .map(|k| {
            let win: f64 = (0..=k)
                .filter(|&j| 4 * j > 3 * k)
                .map(|j| stats::binomial_pmf(k, 0.5, j))
                .sum();
            stats::binomial_pmf(n, q, k) * win
        })
        .sum()
}

/// Union bound on two of `λ` honest repetitions sharing an image point.
pub fn duplicate_bound(lambda: usize, a: u64, b: u64) -> f64 {
    let pairs = (lambda * lambda.saturating_sub(1) / 2) as f64;
    pairs * (1.0 / a as f64 + 1.0 / b as f64)
}

/// Lower bound on honest h-CollisionHashing acceptance when at least
/// `needed` of `λ` repetitions must hit `TwoToOne`, before duplicates.
pub fn h_collision_hit_bound(lambda: usize, needed: u64) -> f64 {
    let q = two_to_one_hit_rate(1u64 << lambda);
    stats::binomial_tail_ge(lambda as u64, q, needed)
}

/// Product of per-step Chernoff bounds for a chain of `steps` instances.
pub fn serial_product_bound(lambda: usize, steps: usize) -> Result<f64> {
    let c = rational_to_f64(&c_for_lambda(lambda)?)?;
    Ok(chernoff_lower_bound(c, lambda).powi(steps as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_exact_small_values() {
        assert_eq!(c_exact(4, 2).unwrap(), BigRational::new(2.into(), 5.into()));
        assert_eq!(c_exact(2, 2).unwrap(), BigRational::new(1.into(), 3.into()));
        assert!(c_exact(1, 2).is_err());
    }

    #[test]
    fn shortcut_reduction_matches_full_gcd() {
        for (a, b) in [(64u64, 32u64), (100, 7), (512, 256), (30, 29)] {
            let c = c_exact(a, b).unwrap();
            let full = BigRational::new(c.numer().clone(), c.denom().clone());
            assert_eq!((c.numer(), c.denom()), (full.numer(), full.denom()));
        }
    }

    #[test]
    fn c_exact_matches_enumeration() {
        for a in 2..=6 {
            for b in 2..=3 {
                assert_eq!(c_exact(a, b).unwrap(), c_brute_force(a, b).unwrap(), "A={a} B={b}");
            }
        }
    }

    #[test]
    fn c_exact_approaches_the_limit() {
        let lim = c_limit(2);
        assert!((lim - 0.313_035).abs() < 1e-5);
        let mut prev_gap = f64::INFINITY;
        for t in 10..=14 {
            let v = c_exact_f64(1 << (t + 1), 1 << t).unwrap();
            let gap = (v - lim).abs();
            assert!(gap / lim < 0.01, "t={t}: {v}");
            assert!(gap <= prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn limits_and_big_c() {
        assert!((c_limit(1) - 0.290_988).abs() < 1e-5);
        assert!((capital_c() - c_limit(2) / 4.0).abs() < 1e-15);
        assert!((capital_c() - 0.078_259).abs() < 1e-5);
    }

    #[test]
    fn rates_at_small_sizes() {
        // exact: a fixed point of B is hit by exactly two of A=4 points of B=2
        assert!((uniform_two_preimage_rate(4, 2) - 6.0 / 16.0).abs() < 1e-12);
        // conditioning on a sampled input: 3 others, exactly one lands with it
        assert!((measured_two_preimage_rate(4, 2) - 3.0 / 8.0).abs() < 1e-12);
        assert!((two_to_one_density(16) - 0.144_3).abs() < 1e-3);
    }

    #[test]
    fn frozen_bounds() {
        let c12 = c_exact_f64(1 << 13, 1 << 12).unwrap();
        assert!((chernoff_lower_bound(c12, 12) - 0.111).abs() < 2e-3);
        let rg = random_guess_bound(12, c12);
        assert!((rg - 0.076_099).abs() < 1e-4, "{rg}");
        let s = serial_product_bound(8, 4).unwrap();
        assert!(s > 2e-5 && s < 5e-5, "{s}");
    }

    #[test]
    fn huge_rationals_convert() {
        let v = c_exact_f64(1 << 17, 1 << 16).unwrap();
        assert!((v - c_limit(2)).abs() < 1e-3);
    }
}
