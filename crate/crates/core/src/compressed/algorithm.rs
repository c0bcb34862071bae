//! Small phase-oracle algorithms run against the compressed oracle and against
//! the purified oracle (an explicit average over every function).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Gate, StateVector, C64};
use crate::seed::Seed;
use crate::stats::tv_dense;

use super::state::{decomp_involution_error, CompressedState};

/// Domain bits accepted by [`run_compressed`].
pub const MAX_DOMAIN_BITS: usize = 6;
/// Queries accepted by [`run_compressed`].
pub const MAX_QUERIES: usize = 8;
/// Largest `m·2^n` the purified reference will enumerate.
pub const PURIFIED_TABLE_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Gate(Gate),
    /// Phase query with input qubits `0..n` and phase qubits `n..n+m`.
    Query,
}

/// Gates and phase queries over `n + m + work` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TestAlgorithm {
    pub n: usize,
    pub m: usize,
    pub work: usize,
    pub steps: Vec<Step>,
}

fn random_unitary<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Gate {
    use std::f64::consts::PI;
    let (t, p, l) = (
        rng.random::<f64>() * PI,
        rng.random::<f64>() * 2.0 * PI,
        rng.random::<f64>() * 2.0 * PI,
    );
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let e = |a: f64| C64::from_polar(1.0, a);
    Gate::Single {
        qubit: q,
        matrix: [[C64::new(c, 0.0), -e(l) * s], [e(p) * s, e(p + l) * c]],
    }
}

impl TestAlgorithm {
    pub fn num_qubits(&self) -> usize {
        self.n + self.m + self.work
    }

    pub fn input_qubits(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn phase_qubits(&self) -> Vec<usize> {
        (self.n..self.n + self.m).collect()
    }

    pub fn queries(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Query)).count()
    }

    /// `q + 1` rounds of random single-qubit unitaries on every qubit and a
    /// few random CNOTs, separated by `q` queries.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, work: usize, q: usize, rng: &mut R) -> Self {
        let k = n + m + work;
        let mut steps = Vec::new();
        for round in 0..=q {
            steps.extend((0..k).map(|i| Step::Gate(random_unitary(i, rng))));
            if k > 1 {
                for _ in 0..k {
                    let a = rng.random_range(0..k);
                    let b = (a + 1 + rng.random_range(0..k - 1)) % k;
                    steps.push(Step::Gate(Gate::cnot(a, b)));
                }
            }
            if round < q {
                steps.push(Step::Query);
            }
        }
        TestAlgorithm { n, m, work, steps }
    }

    /// One Grover iteration over a 2-bit domain with a 1-bit oracle.
    pub fn grover() -> Self {
        let mut steps: Vec<Step> = (0..2).map(|q| Step::Gate(Gate::h(q))).collect();
        steps.push(Step::Gate(Gate::x(2)));
        steps.push(Step::Query);
        for g in [
            Gate::h(0),
            Gate::h(1),
            Gate::x(0),
            Gate::x(1),
            Gate::cz(0, 1),
            Gate::x(0),
            Gate::x(1),
            Gate::h(0),
            Gate::h(1),
        ] {
            steps.push(Step::Gate(g));
        }
        TestAlgorithm {
            n: 2,
            m: 1,
            work: 0,
            steps,
        }
    }
}

/// Output distribution of the algorithm with the oracle replaced by a
/// uniformly random function, averaged exactly over every function.
pub fn run_purified(alg: &TestAlgorithm) -> Result<Vec<f64>> {
    let bits = alg.m << alg.n;
    if bits > PURIFIED_TABLE_BITS {
        return Err(Error::CapExceeded {
            what: "purified function table bits",
            needed: bits,
            cap: PURIFIED_TABLE_BITS,
        });
    }
    let (xs, zs) = (alg.input_qubits(), alg.phase_qubits());
    let mask = (1u64 << alg.m) - 1;
    let count = 1u64 << bits;
    let run = |f: u64| -> Result<Vec<f64>> {
        let mut sv = StateVector::new(alg.num_qubits())?;
        for step in &alg.steps {
            match step {
                Step::Gate(Gate::Single { qubit, matrix }) => sv.apply_single(*qubit, matrix),
                Step::Gate(Gate::Double { qubits, matrix }) => sv.apply_double(qubits[0], qubits[1], matrix),
                Step::Query => sv.apply_phase_oracle(&xs, &zs, &|x| (f >> (x as usize * alg.m)) & mask),
            }
        }
        Ok(sv.amplitudes().iter().map(|a| a.norm_sqr()).collect())
    };
    // Fixed chunking keeps the floating-point sum order independent of threads.
    let chunk = 1024.min(count);
    let partial: Vec<Vec<f64>> = (0..count / chunk)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; 1 << alg.num_qubits()];
            for f in c * chunk..(c + 1) * chunk {
                for (a, p) in acc.iter_mut().zip(run(f)?) {
                    *a += p;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; 1 << alg.num_qubits()];
    for p in partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total.into_iter().map(|v| v / count as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedRun {
    /// Over every basis state of the algorithm's qubits.
    pub distribution: Vec<f64>,
    /// Probability of `|D| = k`, for `k` up to the number of queries.
    pub db_size_distribution: Vec<f64>,
    pub final_capacity: usize,
    /// Database basis states with nonzero weight at the end.
    pub support: usize,
    pub ordered: bool,
}

/// Exact simulation against the compressed phase oracle.
pub fn run_compressed(alg: &TestAlgorithm) -> Result<CompressedRun> {
    if alg.n > MAX_DOMAIN_BITS {
        return Err(Error::CapExceeded {
            what: "compressed domain bits",
            needed: alg.n,
            cap: MAX_DOMAIN_BITS,
        });
    }
    if alg.queries() > MAX_QUERIES {
        return Err(Error::CapExceeded {
            what: "compressed queries",
            needed: alg.queries(),
            cap: MAX_QUERIES,
        });
    }
    let (xs, zs) = (alg.input_qubits(), alg.phase_qubits());
    let mut s = CompressedState::new(alg.n, alg.m, alg.num_qubits())?;
    let mut ordered = true;
    for step in &alg.steps {
        match step {
            Step::Gate(g) => s.apply_gate(g),
            Step::Query => {
                s.cpho_query(&xs, &zs);
                ordered &= s.is_well_formed();
            }
        }
    }
    Ok(CompressedRun {
        distribution: s.alg_distribution(),
        db_size_distribution: s.db_size_distribution(),
        final_capacity: s.capacity(),
        support: s.branches().count(),
        ordered,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCase {
    pub n: usize,
    pub m: usize,
    pub queries: usize,
    pub tv: f64,
    pub max_db_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub experiment: String,
    pub seed: Seed,
    pub cases: Vec<EquivalenceCase>,
    pub max_tv: f64,
    /// `Decomp_x` deviation from an orthogonal involution at `n = 4, m = 1, t = 2`.
    pub decomp_involution_error: f64,
}

/// Random algorithms with `n ≤ 4` and `q ≤ 4`, each compared against the
/// purified reference.
pub fn equivalence_suite(count: usize, seed: Seed) -> Result<EquivalenceReport> {
    let cases = (0..count as u64)
        .map(|i| {
            let mut rng = seed.trial(i).rng();
            let n = rng.random_range(1..=4);
            let m = if n <= 3 { rng.random_range(1..=2) } else { 1 };
            let q = rng.random_range(0..=4);
            let alg = TestAlgorithm::random(n, m, 1, q, &mut rng);
            let c = run_compressed(&alg)?;
            let p = run_purified(&alg)?;
            let max_db_size = c.db_size_distribution.iter().rposition(|&w| w > 1e-12).unwrap_or(0);
            Ok(EquivalenceCase {
                n,
                m,
                queries: q,
                tv: tv_dense(&c.distribution, &p),
                max_db_size,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_tv = cases.iter().map(|c| c.tv).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        experiment: "compressed-equiv".into(),
        seed,
        cases,
        max_tv,
        decomp_involution_error: decomp_involution_error(4, 1, 2)?,
    })
}
