//! The recursive chain `H_d ∘ … ∘ H_0` with expanding middle domains.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, BIT_CAP};
use crate::error::{Error, Result};

use super::{derive_suboracle, truth_table, BitFunction, QueryLog, RandomOracle};

#[derive(Debug, Clone)]
pub struct ComposedOracle {
    stages: Vec<RandomOracle>,
    sigma_bits: usize,
    d: usize,
    d_prime: usize,
    out_bits: usize,
}

/// Builds `d + 1` stages from `base` under the tags `stage/0 … stage/d`.
///
/// Stage widths: `σ -> σ·d'`, then `σ·d' -> σ·d'`, then `σ·d' -> out`, with
/// `d' = 2d + 5`. For `d = 0` the only stage is `σ -> out`.
pub fn compose_recursive(base: &RandomOracle, sigma_bits: usize, d: usize, out_bits: usize) -> Result<ComposedOracle> {
    if sigma_bits == 0 || out_bits == 0 {
        return Err(Error::param("composed oracle needs positive widths"));
    }
    let d_prime = 2 * d + 5;
    let mid = sigma_bits
        .checked_mul(d_prime)
        .filter(|&m| m <= BIT_CAP)
        .ok_or_else(|| {
            Error::param(format!(
                "stage width {sigma_bits}*{d_prime} exceeds the {BIT_CAP}-bit cap"
            ))
        })?;
    if out_bits > BIT_CAP {
        return Err(Error::param(format!(
            "output width {out_bits} exceeds the {BIT_CAP}-bit cap"
        )));
    }
    let stages = (0..=d)
        .map(|j| {
            let (i, o) = stage_widths(sigma_bits, mid, d, out_bits, j);
            derive_suboracle(base, format!("stage/{j}").as_bytes(), i, o)
        })
        .collect();
    Ok(ComposedOracle {
        stages,
        sigma_bits,
        d,
        d_prime,
        out_bits,
    })
}

fn stage_widths(sigma: usize, mid: usize, d: usize, out: usize, j: usize) -> (usize, usize) {
    let i = if j == 0 { sigma } else { mid };
    let o = if j == d { out } else { mid };
    (i, o)
}

impl ComposedOracle {
    pub fn stages(&self) -> &[RandomOracle] {
        &self.stages
    }

    pub fn stage(&self, j: usize) -> &RandomOracle {
        &self.stages[j]
    }

    pub fn sigma_bits(&self) -> usize {
        self.sigma_bits
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_prime(&self) -> usize {
        self.d_prime
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    /// Width of the values flowing between stages.
    pub fn mid_bits(&self) -> usize {
        self.sigma_bits * self.d_prime
    }

    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        let mut v = x.clone();
        for s in &self.stages {
            v = s.eval(&v)?;
        }
        Ok(v)
    }

    /// Stage-by-stage evaluation, one log entry per stage.
    pub fn eval_logged(&self, x: &BitString, log: &mut QueryLog) -> Result<BitString> {
        if x.len() != self.sigma_bits {
            return Err(Error::WidthMismatch {
                expected: self.sigma_bits,
                got: x.len(),
            });
        }
        let mut v = x.clone();
        for s in &self.stages {
            v = log.eval(s, &v)?;
        }
        Ok(v)
    }

    /// Forward chain from `x` at stage `i` through the last stage.
    pub fn path_query(&self, i: usize, x: &BitString, log: &mut QueryLog) -> Result<Path> {
        if i > self.d {
            return Err(Error::param(format!("stage {i} beyond d = {}", self.d)));
        }
        let mut coords = vec![x.clone()];
        for s in &self.stages[i..] {
            let next = log.eval(s, coords.last().unwrap())?;
            coords.push(next);
        }
        Ok(Path { start: i, coords })
    }
}

impl BitFunction for ComposedOracle {
    fn in_bits(&self) -> usize {
        self.sigma_bits
    }
    fn out_bits(&self) -> usize {
        self.out_bits
    }
    fn apply(&self, x: &BitString) -> BitString {
        self.eval(x).expect("composed oracle input width")
    }
}

/// Stage values `x_start, x_{start+1}, …`; `x_{j+1} = H_j(x_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub start: usize,
    pub coords: Vec<BitString>,
}

impl Path {
    pub fn is_consistent(&self, c: &ComposedOracle) -> bool {
        self.coords
            .windows(2)
            .enumerate()
            .all(|(k, w)| c.stage(self.start + k).eval(&w[0]).map(|y| y == w[1]).unwrap_or(false))
    }
}

/// A composed oracle with inverse tables for every stage whose domain fits the
/// table cap; only those stages support backward path extension.
pub struct TabulatedComposed<'a> {
    oracle: &'a ComposedOracle,
    inverses: Vec<Option<HashMap<BitString, Vec<BitString>>>>,
}

impl<'a> TabulatedComposed<'a> {
    pub fn new(oracle: &'a ComposedOracle, cap: usize) -> Self {
        let inverses = oracle
            .stages
            .iter()
            .map(|s| {
                let n = s.in_bits().unwrap();
                if n > cap {
                    return None;
                }
                let mut inv: HashMap<BitString, Vec<BitString>> = HashMap::new();
                if s.out_bits() <= 64 {
                    let t = truth_table(s, cap).ok()?;
                    for (x, &y) in t.values().iter().enumerate() {
                        inv.entry(BitString::from_u64(y, s.out_bits()))
                            .or_default()
                            .push(BitString::from_u64(x as u64, n));
                    }
                } else {
                    for x in 0..1u64 << n {
                        let xb = BitString::from_u64(x, n);
                        inv.entry(s.eval(&xb).unwrap()).or_default().push(xb);
                    }
                }
                Some(inv)
            })
            .collect();
        TabulatedComposed { oracle, inverses }
    }

    pub fn is_invertible(&self, stage: usize) -> bool {
        self.inverses.get(stage).map(|o| o.is_some()).unwrap_or(false)
    }

    /// All one-step backward extensions of `path`; `None` when the preceding
    /// stage was not tabulated or the path already starts at stage 0.
    pub fn extend_backward(&self, path: &Path) -> Option<Vec<Path>> {
        if path.start == 0 {
            return None;
        }
        let inv = self.inverses[path.start - 1].as_ref()?;
        let pre = inv.get(&path.coords[0]).cloned().unwrap_or_default();
        Some(
            pre.into_iter()
                .map(|u| {
                    let mut coords = vec![u];
                    coords.extend(path.coords.iter().cloned());
                    Path {
                        start: path.start - 1,
                        coords,
                    }
                })
                .collect(),
        )
    }

    pub fn oracle(&self) -> &ComposedOracle {
        self.oracle
    }
}
