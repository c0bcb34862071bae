use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::qsim::{register_value, Gate, StateVector, C64, MAX_QUBITS};

use super::database::{all_databases, Database};

const ZERO: C64 = C64::new(0.0, 0.0);
/// Branches whose squared norm falls below this are dropped.
const PRUNE: f64 = 1e-26;

/// Algorithm registers jointly with a compressed database over `n`-bit inputs
/// and `m`-bit values.
///
/// Stored as one algorithm-register vector per database basis state, so the
/// joint amplitude of `|a⟩|D⟩` is `branches[D][a]`.
#[derive(Debug, Clone)]
pub struct CompressedState {
    n: usize,
    m: usize,
    alg_qubits: usize,
    capacity: usize,
    branches: BTreeMap<Database, Vec<C64>>,
}

impl CompressedState {
    /// `|0…0⟩` on the algorithm registers and the empty database.
    pub fn new(n: usize, m: usize, alg_qubits: usize) -> Result<Self> {
        Self::from_basis(n, m, alg_qubits, 0, Database::new(), 0)
    }

    pub fn from_basis(n: usize, m: usize, alg_qubits: usize, a: u64, db: Database, capacity: usize) -> Result<Self> {
        if alg_qubits > MAX_QUBITS {
            return Err(Error::CapExceeded {
                what: "compressed algorithm qubits",
                needed: alg_qubits,
                cap: MAX_QUBITS,
            });
        }
        if n + m > 40 || m == 0 {
            return Err(Error::param(format!("unsupported oracle shape {n} -> {m}")));
        }
        if !db.is_well_formed(n, m) || db.len() > capacity || a >> alg_qubits != 0 {
            return Err(Error::param("basis state outside the register space"));
        }
        let mut v = vec![ZERO; 1 << alg_qubits];
        v[a as usize] = C64::new(1.0, 0.0);
        Ok(CompressedState {
            n,
            m,
            alg_qubits,
            capacity,
            branches: BTreeMap::from([(db, v)]),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alg_qubits(&self) -> usize {
        self.alg_qubits
    }

    /// Current length of the padded database list.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn branches(&self) -> impl Iterator<Item = (&Database, &[C64])> {
        self.branches.iter().map(|(d, v)| (d, v.as_slice()))
    }

    pub fn amplitude(&self, a: u64, db: &Database) -> C64 {
        self.branches.get(db).map_or(ZERO, |v| v[a as usize])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.branches.values().flatten().map(|a| a.norm_sqr()).sum()
    }

    /// Every stored database is ordered, inside the domain, and fits the capacity.
    pub fn is_well_formed(&self) -> bool {
        self.branches
            .keys()
            .all(|d| d.is_well_formed(self.n, self.m) && d.len() <= self.capacity)
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        for v in self.branches.values_mut() {
            let mut sv = StateVector::from_amplitudes(std::mem::take(v)).expect("power-of-two length");
            match gate {
                Gate::Single { qubit, matrix } => sv.apply_single(*qubit, matrix),
                Gate::Double { qubits, matrix } => sv.apply_double(qubits[0], qubits[1], matrix),
            }
            *v = sv.amplitudes().to_vec();
        }
    }

    /// `|a⟩ -> |a ⊕ scatter(f(query))⟩` on the algorithm registers only.
    pub fn apply_xor(&mut self, query: &[usize], target: &[usize], f: &dyn Fn(u64) -> u64) {
        for v in self.branches.values_mut() {
            let mut sv = StateVector::from_amplitudes(std::mem::take(v)).expect("power-of-two length");
            sv.apply_xor_oracle(query, target, f);
            *v = sv.amplitudes().to_vec();
        }
    }

    /// Multiplies `|a⟩|D⟩` by `phase(a)` for every database.
    pub fn apply_diagonal(&mut self, phase: &dyn Fn(u64) -> C64) {
        for v in self.branches.values_mut() {
            for (a, amp) in v.iter_mut().enumerate() {
                *amp *= phase(a as u64);
            }
        }
    }

    /// Grows the padded list by one `(⊥, 0)` slot.
    pub fn increase(&mut self) {
        self.capacity += 1;
    }

    /// `Decomp_x` on every algorithm basis state `a` with `active(a)`, where
    /// `x = input(a)`.
    pub fn decomp_where(&mut self, input: &dyn Fn(u64) -> u64, active: &dyn Fn(u64) -> bool) {
        let size = 1usize << self.m;
        let inv = 1.0 / (size as f64).sqrt();
        let dim = 1usize << self.alg_qubits;
        let mut out: BTreeMap<Database, Vec<C64>> = BTreeMap::new();
        let put = |out: &mut BTreeMap<Database, Vec<C64>>, d: Database, a: usize, amp: C64| {
            if amp != ZERO {
                out.entry(d).or_insert_with(|| vec![ZERO; dim])[a] += amp;
            }
        };
        for a in 0..dim {
            let x = input(a as u64);
            if !active(a as u64) {
                for (d, v) in &self.branches {
                    put(&mut out, d.clone(), a, v[a]);
                }
                continue;
            }
            // Amplitudes of D' (x undefined) and of D' ∪ (x, y), grouped by D'.
            let mut groups: BTreeMap<Database, (C64, Vec<C64>)> = BTreeMap::new();
            for (d, v) in &self.branches {
                let amp = v[a];
                if amp == ZERO {
                    continue;
                }
                match d.get(x) {
                    None => groups.entry(d.clone()).or_insert_with(|| (ZERO, vec![ZERO; size])).0 += amp,
                    Some(w) => {
                        groups.entry(d.without(x)).or_insert_with(|| (ZERO, vec![ZERO; size])).1[w as usize] += amp
                    }
                }
            }
            for (base, (a0, b)) in groups {
                if base.len() >= self.capacity {
                    // No free slot: x cannot be added.
                    put(&mut out, base, a, a0);
                    continue;
                }
                let s = b.iter().sum::<C64>() * inv;
                put(&mut out, base.clone(), a, s);
                for (y, by) in b.into_iter().enumerate() {
                    let amp = by + (a0 - s) * inv;
                    if amp.norm_sqr() > PRUNE {
                        put(&mut out, base.with(x, y as u64), a, amp);
                    }
                }
            }
        }
        out.retain(|_, v| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > PRUNE);
        self.branches = out;
    }

    /// `Decomp` controlled on the algorithm's input register.
    pub fn decomp(&mut self, query: &[usize]) {
        self.decomp_where(&|a| register_value(a, query), &|_| true);
    }

    /// `Decomp_x` for a fixed input.
    pub fn decomp_at(&mut self, x: u64) {
        self.decomp_where(&|_| x, &|_| true);
    }

    /// `(−1)^{z·D(x)}`, with `⊥` read as zero.
    pub fn cpho_prime_where(
        &mut self,
        input: &dyn Fn(u64) -> u64,
        z: &dyn Fn(u64) -> u64,
        active: &dyn Fn(u64) -> bool,
    ) {
        for (d, v) in self.branches.iter_mut() {
            for (a, amp) in v.iter_mut().enumerate() {
                let a = a as u64;
                if active(a) && (d.get(input(a)).unwrap_or(0) & z(a)).count_ones() & 1 == 1 {
                    *amp = -*amp;
                }
            }
        }
    }

    /// One compressed phase query on the basis states selected by `active`:
    /// `Decomp ∘ CPhO′ ∘ Decomp ∘ Increase`.
    pub fn cpho_query_where(
        &mut self,
        input: &dyn Fn(u64) -> u64,
        z: &dyn Fn(u64) -> u64,
        active: &dyn Fn(u64) -> bool,
    ) {
        self.increase();
        self.decomp_where(input, active);
        self.cpho_prime_where(input, z, active);
        self.decomp_where(input, active);
    }

    /// Compressed phase query with input register `query` and phase register `z`.
    pub fn cpho_query(&mut self, query: &[usize], z: &[usize]) {
        self.cpho_query_where(&|a| register_value(a, query), &|a| register_value(a, z), &|_| true);
    }

    /// Distribution of `key(a)` over `outcomes` values, summed over databases.
    pub fn distribution(&self, outcomes: usize, key: &dyn Fn(u64) -> usize) -> Vec<f64> {
        let mut p = vec![0.0; outcomes];
        for v in self.branches.values() {
            for (a, amp) in v.iter().enumerate() {
                p[key(a as u64)] += amp.norm_sqr();
            }
        }
        p
    }

    /// Output distribution over all algorithm basis states.
    pub fn alg_distribution(&self) -> Vec<f64> {
        self.distribution(1 << self.alg_qubits, &|a| a as usize)
    }

    /// Distribution of `|D|`, indexed `0..=capacity`.
    pub fn db_size_distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.capacity + 1];
        for (d, v) in &self.branches {
            p[d.len()] += v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
        p
    }

    /// Samples `key(a)` and collapses onto it.
    pub fn measure<R: Rng + ?Sized>(&mut self, outcomes: usize, key: &dyn Fn(u64) -> usize, rng: &mut R) -> usize {
        let p = self.distribution(outcomes, key);
        let total: f64 = p.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut k = p.len() - 1;
        for (i, &pi) in p.iter().enumerate() {
            if u < pi {
                k = i;
                break;
            }
            u -= pi;
        }
        // Guard against landing on an empty bucket through rounding.
        if p[k] == 0.0 {
            k = p.iter().rposition(|&x| x > 0.0).expect("nonzero state");
        }
        let scale = 1.0 / p[k].sqrt();
        for v in self.branches.values_mut() {
            for (a, amp) in v.iter_mut().enumerate() {
                *amp = if key(a as u64) == k { *amp * scale } else { ZERO };
            }
        }
        self.branches.retain(|_, v| v.iter().any(|a| *a != ZERO));
        k
    }
}

/// `Decomp_x` as a dense real matrix over every database with at most `t`
/// pairs (no algorithm registers), columns indexed like [`all_databases`].
pub fn decomp_matrix(n: usize, m: usize, t: usize, x: u64) -> Result<(Vec<Database>, Vec<Vec<f64>>)> {
    const CAP: usize = 4096;
    let basis = all_databases(n, m, t);
    if basis.len() > CAP {
        return Err(Error::CapExceeded {
            what: "decomp matrix dimension",
            needed: basis.len(),
            cap: CAP,
        });
    }
    let index: BTreeMap<&Database, usize> = basis.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut mat = vec![vec![0.0; basis.len()]; basis.len()];
    for (j, d) in basis.iter().enumerate() {
        let mut s = CompressedState::from_basis(n, m, 0, 0, d.clone(), t)?;
        s.decomp_at(x);
        for (d2, v) in s.branches() {
            mat[index[d2]][j] = v[0].re;
        }
    }
    Ok((basis, mat))
}

/// Largest deviation of `Decomp_x` from a symmetric involution (hence an
/// orthogonal matrix) over every `x` in the domain. `M·M` is taken by applying
/// the operator twice to each basis column.
pub fn decomp_involution_error(n: usize, m: usize, t: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in 0..1u64 << n {
        let (basis, mat) = decomp_matrix(n, m, t, x)?;
        for (i, row) in mat.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((v - mat[j][i]).abs());
            }
        }
        for d in &basis {
            let mut s = CompressedState::from_basis(n, m, 0, 0, d.clone(), t)?;
            s.decomp_at(x);
            s.decomp_at(x);
            for (d2, v) in s.branches() {
                let id = if d2 == d { 1.0 } else { 0.0 };
                worst = worst.max((v[0] - C64::new(id, 0.0)).norm());
            }
            worst = worst.max((1.0 - s.amplitude(0, d).re).abs());
        }
    }
    Ok(worst)
}
