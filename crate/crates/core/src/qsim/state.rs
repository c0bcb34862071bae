use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Largest register a dense state will allocate.
pub const MAX_QUBITS: usize = 26;

/// Dense amplitudes over `n` qubits.
///
/// Qubit `k` is bit `k` of the basis index. A register listed as
/// `[a, b, c]` reads as the integer `a·4 + b·2 + c`, so register bit `j` is
/// bit `j` (MSB first) of the matching [`BitString`](crate::BitString).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "dense qubits",
                needed: n,
                cap: MAX_QUBITS,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index as usize] = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::param(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "dense qubits",
                needed: n,
                cap: MAX_QUBITS,
            });
        }
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_single(&mut self, q: usize, m: &Mat2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Local basis order is `bit(q0)·2 + bit(q1)`.
    pub fn apply_double(&mut self, q0: usize, q1: usize, m: &Mat4) {
        let (b0, b1) = (1usize << q0, 1usize << q1);
        for i in 0..self.amps.len() {
            if i & (b0 | b1) == 0 {
                let idx = [i, i | b1, i | b0, i | b0 | b1];
                let a = idx.map(|j| self.amps[j]);
                for (r, &j) in idx.iter().enumerate() {
                    self.amps[j] = (0..4).map(|c| m[r][c] * a[c]).sum();
                }
            }
        }
    }

    /// `|x⟩|a⟩ -> |x⟩|a ⊕ f(x)⟩`.
    pub fn apply_xor_oracle(&mut self, query: &[usize], target: &[usize], f: &dyn Fn(u64) -> u64) {
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let fx = f(register_value(i as u64, query));
            out[(i as u64 ^ scatter(fx, target)) as usize] = *a;
        }
        self.amps = out;
    }

    /// `|x⟩|z⟩ -> (−1)^{z·f(x)} |x⟩|z⟩`.
    pub fn apply_phase_oracle(&mut self, query: &[usize], z: &[usize], f: &dyn Fn(u64) -> u64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            let zv = register_value(i as u64, z);
            if zv == 0 || a.norm_sqr() == 0.0 {
                continue;
            }
            if (f(register_value(i as u64, query)) & zv).count_ones() & 1 == 1 {
                *a = -*a;
            }
        }
    }

    /// Born-rule distribution of a register.
    pub fn probabilities(&self, qubits: &[usize]) -> Vec<f64> {
        let mut p = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            p[register_value(i as u64, qubits) as usize] += a.norm_sqr();
        }
        p
    }

    /// Samples the register and collapses; measured qubits stay in the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> u64 {
        let p = self.probabilities(qubits);
        let outcome = sample_index(&p, rng) as u64;
        let scale = 1.0 / p[outcome as usize].sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if register_value(i as u64, qubits) == outcome {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        outcome
    }

    /// Samples the register and returns the state of the remaining qubits,
    /// which keep their relative order.
    pub fn measure_discard<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> (u64, StateVector) {
        let p = self.probabilities(qubits);
        let outcome = sample_index(&p, rng) as u64;
        let scale = 1.0 / p[outcome as usize].sqrt();
        let keep: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << keep.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if register_value(i as u64, qubits) == outcome {
                amps[gather(i as u64, &keep) as usize] = *a * scale;
            }
        }
        (outcome, StateVector { n: keep.len(), amps })
    }

    /// `self ⊗ other`, with `other` on the higher qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "dense qubits",
                needed: n,
                cap: MAX_QUBITS,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            amps.extend(self.amps.iter().map(|a| a * b));
        }
        Ok(StateVector { n, amps })
    }

    /// `|⟨self|other⟩|`, handy for comparing up to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm()
    }
}

/// Reads qubits `qs` of basis index `i`, first listed qubit most significant.
pub fn register_value(i: u64, qs: &[usize]) -> u64 {
    qs.iter().fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1))
}

/// Inverse of [`register_value`]: places the bits of `v` on qubits `qs`.
pub fn scatter(v: u64, qs: &[usize]) -> u64 {
    let k = qs.len();
    qs.iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((v >> (k - 1 - j)) & 1) << q))
}

/// Packs the listed qubits of `i` into consecutive low bits, in list order.
fn gather(i: u64, qs: &[usize]) -> u64 {
    qs.iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((i >> q) & 1) << j))
}

pub(crate) fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let total: f64 = p.iter().sum();
    let mut r = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            last = i;
            if r < pi {
                return i;
            }
            r -= pi;
        }
    }
    last
}
