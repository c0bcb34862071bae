//! The honest CollisionHashing prover: superpose, image through `g`, phase
//! through the equation oracle, Hadamard-measure.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::{run_qnc, Backend, DepthBudget, OracleCall, QOp, QProgram, RunOptions, RunTrace};
use crate::oracle::TruthTable;
use crate::problems::collision::{stage_name, G, H_PRIME};
use crate::problems::{CollisionInstance, CollisionSolution, CollisionTriple, EquationOracle, ENUM_CAP};
use crate::qsim::{Gate, GateLayer};

use super::{ProverBackend, ProverRun};

/// Depth of the honest circuit: 4 unlifted, `2d + 4` with a `d`-lifted
/// equation oracle (the single phase round becomes `2d + 1` rounds).
pub fn collision_depth(lift: Option<usize>) -> usize {
    match lift {
        None => 4,
        Some(d) => 2 * d + 4,
    }
}

/// Qubit positions for `reps` parallel repetitions.
#[derive(Debug, Clone)]
pub struct CollisionLayout {
    pub lambda: usize,
    pub reps: usize,
    /// Number of intermediate stage registers per repetition (`d` when lifted).
    pub stages: usize,
    pub mid_bits: usize,
}

impl CollisionLayout {
    pub fn new(inst: &CollisionInstance, reps: usize) -> Self {
        let lambda = inst.lambda();
        let (stages, mid_bits) = match inst.equation() {
            EquationOracle::Direct(_) => (0, 0),
            EquationOracle::Lifted(c) => (c.d(), c.mid_bits()),
        };
        CollisionLayout {
            lambda,
            reps,
            stages,
            mid_bits,
        }
    }

    pub fn width(&self) -> usize {
        2 * self.lambda + 2 + self.stages * self.mid_bits
    }

    pub fn num_qubits(&self) -> usize {
        self.reps * self.width()
    }

    fn base(&self, rep: usize) -> usize {
        rep * self.width()
    }

    pub fn x(&self, rep: usize) -> Vec<usize> {
        let b = self.base(rep);
        (b..b + self.lambda + 1).collect()
    }

    pub fn y(&self, rep: usize) -> Vec<usize> {
        let b = self.base(rep) + self.lambda + 1;
        (b..b + self.lambda).collect()
    }

    pub fn z(&self, rep: usize) -> usize {
        self.base(rep) + 2 * self.lambda + 1
    }

    /// Register holding `H_j(…)`, for `j < stages`.
    pub fn s(&self, rep: usize, j: usize) -> Vec<usize> {
        let b = self.base(rep) + 2 * self.lambda + 2 + j * self.mid_bits;
        (b..b + self.mid_bits).collect()
    }

    /// Measured qubits per repetition: `y`, then `x`, then `z`.
    pub fn measured(&self) -> Vec<usize> {
        (0..self.reps)
            .flat_map(|i| {
                let mut v = self.y(i);
                v.extend(self.x(i));
                v.push(self.z(i));
                v
            })
            .collect()
    }

    /// Triples `(y, m = 0, r = x)` from an outcome over [`Self::measured`].
    pub fn decode(&self, out: &BitString) -> Vec<CollisionTriple> {
        let w = 2 * self.lambda + 2;
        (0..self.reps)
            .map(|i| {
                let b = i * w;
                CollisionTriple {
                    y: out.slice(b, b + self.lambda),
                    m: false,
                    r: out.slice(b + self.lambda, b + 2 * self.lambda + 1),
                }
            })
            .collect()
    }
}

/// `reps` repetitions side by side in one circuit.
pub fn collision_program(inst: &CollisionInstance, reps: usize) -> (QProgram, CollisionLayout) {
    let lay = CollisionLayout::new(inst, reps);
    let all = |f: &dyn Fn(usize) -> Vec<OracleCall>| -> QOp { QOp::Oracle((0..reps).flat_map(f).collect()) };
    let mut first = Vec::new();
    for i in 0..reps {
        first.extend(lay.x(i).into_iter().map(Gate::h));
        first.push(Gate::x(lay.z(i)));
    }
    let mut ops = vec![
        QOp::Layer(GateLayer::new(first).expect("disjoint")),
        all(&|i| vec![OracleCall::xor(G, lay.x(i), lay.y(i))]),
    ];
    match inst.lift_depth() {
        None => ops.push(all(&|i| vec![OracleCall::phase(H_PRIME, lay.x(i), vec![lay.z(i)])])),
        Some(d) => {
            let input = |i: usize, j: usize| if j == 0 { lay.x(i) } else { lay.s(i, j - 1) };
            for j in 0..d {
                ops.push(all(&|i| {
                    vec![OracleCall::xor(&stage_name(j), input(i, j), lay.s(i, j))]
                }));
            }
            ops.push(all(&|i| {
                vec![OracleCall::phase(&stage_name(d), input(i, d), vec![lay.z(i)])]
            }));
            for j in (0..d).rev() {
                ops.push(all(&|i| {
                    vec![OracleCall::xor(&stage_name(j), input(i, j), lay.s(i, j))]
                }));
            }
        }
    }
    ops.push(QOp::Layer(GateLayer::hadamards((0..reps).flat_map(|i| lay.x(i)))));
    let measure = lay.measured();
    (
        QProgram {
            num_qubits: lay.num_qubits(),
            ops,
            measure,
        },
        lay,
    )
}

/// Runs the honest circuit for `reps` repetitions under `budget`.
pub fn run_collision_program<R: Rng + ?Sized>(
    inst: &CollisionInstance,
    reps: usize,
    budget: DepthBudget,
    backend: Backend,
    rng: &mut R,
) -> Result<(Vec<CollisionTriple>, RunTrace)> {
    let (program, lay) = collision_program(inst, reps);
    let trace = run_qnc(
        budget,
        &program,
        &inst.oracles(),
        RunOptions {
            backend,
            query_budget: None,
        },
        rng,
    )?;
    Ok((lay.decode(&trace.output), trace))
}

/// Image and Hadamard outcome of one repetition, with the preimage set of the
/// measured image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repetition {
    pub y: u64,
    pub r: u64,
    pub preimages: Vec<u64>,
}

/// Samples repetition outcomes without building the circuit state: draw `x`,
/// read off `P = g⁻¹(g(x))`, and sample the Hadamard outcome of the uniform
/// superposition over `P` with equation-oracle phases.
pub struct StructuredSampler<'a> {
    inst: &'a CollisionInstance,
    table: TruthTable,
    pre: Vec<Vec<u64>>,
}

impl<'a> StructuredSampler<'a> {
    pub fn new(inst: &'a CollisionInstance) -> Result<Self> {
        let table = inst.g_table()?;
        let pre = table.preimages(ENUM_CAP)?;
        Ok(StructuredSampler { inst, table, pre })
    }

    pub fn preimages(&self, y: u64) -> &[u64] {
        &self.pre[y as usize]
    }

    pub fn table(&self) -> &TruthTable {
        &self.table
    }

    fn phase_bit(&self, z: u64) -> Result<bool> {
        self.inst
            .equation()
            .eval_bit(&BitString::from_u64(z, self.inst.lambda() + 1))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Repetition> {
        let n = self.inst.lambda() + 1;
        let x = rng.random_range(0..1u64 << n);
        let y = self.table.get(x);
        let p = self.pre[y as usize].clone();
        let r = match p.len() {
            1 => rng.random_range(0..1u64 << n),
            2 => {
                let diff = p[0] ^ p[1];
                let rhs = self.phase_bit(p[0])? ^ self.phase_bit(p[1])?;
                let r = rng.random_range(0..1u64 << n);
                if ((r & diff).count_ones() % 2 == 1) == rhs {
                    r
                } else {
                    r ^ (diff & diff.wrapping_neg())
                }
            }
            _ => {
                let signs: Vec<bool> = p.iter().map(|&z| self.phase_bit(z)).collect::<Result<_>>()?;
                let probs: Vec<f64> = (0..1u64 << n)
                    .map(|r| {
                        let amp: i64 = p
                            .iter()
                            .zip(&signs)
                            .map(|(&z, &s)| if s ^ ((r & z).count_ones() % 2 == 1) { -1 } else { 1 })
                            .sum();
                        (amp * amp) as f64
                    })
                    .collect();
                crate::qsim::sample_index(&probs, rng) as u64
            }
        };
        Ok(Repetition { y, r, preimages: p })
    }
}

/// λ repetitions of the honest prover; `m = 0` everywhere.
pub fn honest_collision_prover<R: Rng + ?Sized>(
    inst: &CollisionInstance,
    backend: ProverBackend,
    rng: &mut R,
) -> Result<ProverRun<CollisionSolution>> {
    let l = inst.lambda();
    let depth = collision_depth(inst.lift_depth());
    let budget = DepthBudget::single(depth);
    match backend {
        ProverBackend::StructuredBranch => {
            let s = StructuredSampler::new(inst)?;
            let triples = (0..l)
                .map(|_| {
                    let rep = s.sample(rng)?;
                    Ok(CollisionTriple {
                        y: BitString::from_u64(rep.y, l),
                        m: false,
                        r: BitString::from_u64(rep.r, l + 1),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProverRun {
                solution: CollisionSolution { triples },
                depth,
                trace: None,
            })
        }
        ProverBackend::FullStatevector | ProverBackend::SparseCircuit => {
            let machine = if backend == ProverBackend::FullStatevector {
                if inst.lift_depth().unwrap_or(0) > 0 {
                    return Err(Error::param(
                        "full state vectors cannot hold the lifted stage registers",
                    ));
                }
                Backend::Dense
            } else {
                Backend::Sparse
            };
            let (triples, trace) = run_collision_program(inst, l, budget, machine, rng)?;
            Ok(ProverRun {
                solution: CollisionSolution { triples },
                depth: trace.max_depth(),
                trace: Some(trace),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{verify_collision_hashing, Verdict};
    use crate::seed::Seed;
    use std::collections::HashMap;

    fn inst(seed: u64, lambda: usize) -> CollisionInstance {
        CollisionInstance::new(Seed::from_u64(seed), lambda, &BitString::empty()).unwrap()
    }

    /// Exact Hadamard-outcome distribution of the uniform superposition over
    /// `P` with phases `(-1)^{E(z)}`, by direct enumeration.
    fn interference(p: &[u64], e: &[bool], n: usize) -> Vec<f64> {
        (0..1u64 << n)
            .map(|r| {
                let a: f64 = p
                    .iter()
                    .zip(e)
                    .map(|(&z, &s)| if s ^ ((r & z).count_ones() % 2 == 1) { -1.0 } else { 1.0 })
                    .sum();
                a * a / (p.len() as f64 * (1u64 << n) as f64)
            })
            .collect()
    }

    #[test]
    fn layout_is_disjoint_and_depth_matches() {
        for d in [None, Some(0), Some(1), Some(3)] {
            let base = inst(1, 4);
            let i = match d {
                None => base,
                Some(d) => base.lift_recursive(d).unwrap(),
            };
            let (p, lay) = collision_program(&i, 3);
            assert_eq!(p.depth(), collision_depth(d));
            let mut seen = vec![0; lay.num_qubits()];
            for r in 0..3 {
                for q in lay.x(r).into_iter().chain(lay.y(r)).chain([lay.z(r)]) {
                    seen[q] += 1;
                }
                for j in 0..lay.stages {
                    for q in lay.s(r, j) {
                        seen[q] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn circuit_outcomes_obey_the_equation() {
        let i = inst(2, 5);
        let s = StructuredSampler::new(&i).unwrap();
        let mut rng = Seed::from_u64(3).rng();
        for backend in [Backend::Dense, Backend::Sparse] {
            for _ in 0..40 {
                let (triples, trace) = run_collision_program(&i, 5, DepthBudget::single(4), backend, &mut rng).unwrap();
                assert_eq!(trace.max_depth(), 4);
                for t in triples {
                    let p = s.preimages(t.y.to_u64());
                    if p.len() == 2 {
                        let (a, b) = (BitString::from_u64(p[0], 6), BitString::from_u64(p[1], 6));
                        let rhs = crate::problems::collision::claw_parity(i.equation(), &a, &b, &t.r).unwrap();
                        assert!(!rhs, "m = 0 must satisfy the equation");
                    }
                }
            }
        }
    }

    #[test]
    fn lifted_circuit_uncomputes_and_interferes() {
        let i = inst(4, 4).lift_recursive(2).unwrap();
        let s = StructuredSampler::new(&i).unwrap();
        let mut rng = Seed::from_u64(5).rng();
        for _ in 0..30 {
            let (triples, trace) =
                run_collision_program(&i, 4, DepthBudget::single(8), Backend::Sparse, &mut rng).unwrap();
            assert_eq!(trace.max_depth(), 8);
            for t in triples {
                let p = s.preimages(t.y.to_u64());
                if p.len() == 2 {
                    let (a, b) = (BitString::from_u64(p[0], 5), BitString::from_u64(p[1], 5));
                    assert!(!crate::problems::collision::claw_parity(i.equation(), &a, &b, &t.r).unwrap());
                }
            }
        }
        let err = run_collision_program(&i, 4, DepthBudget::single(2), Backend::Sparse, &mut rng).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { attempted: 3, d: 2, .. }));
    }

    #[test]
    fn structured_branch_matches_exact_interference() {
        // a draw with a 3-preimage point exercises the general branch
        let (i, y3) = (0..200)
            .find_map(|s| {
                let i = inst(s, 4);
                let pre = i.g_table().unwrap().preimages(ENUM_CAP).unwrap();
                pre.iter().position(|p| p.len() == 3).map(|y| (i, y as u64))
            })
            .unwrap();
        let s = StructuredSampler::new(&i).unwrap();
        let p = s.preimages(y3).to_vec();
        let e: Vec<bool> = p
            .iter()
            .map(|&z| i.equation().eval_bit(&BitString::from_u64(z, 5)).unwrap())
            .collect();
        let exact = interference(&p, &e, 5);
        let mut rng = Seed::from_u64(8).rng();
        let mut counts: HashMap<u64, u64> = HashMap::new();
        let mut n = 0u64;
        while n < 20_000 {
            let rep = s.sample(&mut rng).unwrap();
            if rep.y == y3 {
                *counts.entry(rep.r).or_insert(0) += 1;
                n += 1;
            }
        }
        for (r, &pr) in exact.iter().enumerate() {
            let got = *counts.get(&(r as u64)).unwrap_or(&0) as f64 / n as f64;
            assert!(
                (got - pr).abs() <= 4.0 * crate::stats::sigma(pr, n) + 1e-12,
                "r={r}: {got} vs {pr}"
            );
        }
    }

    #[test]
    fn honest_prover_backends_produce_accepted_solutions() {
        let i = inst(6, 6);
        let mut rng = Seed::from_u64(1).rng();
        for backend in [
            ProverBackend::FullStatevector,
            ProverBackend::SparseCircuit,
            ProverBackend::StructuredBranch,
        ] {
            let mut accepted = 0;
            for _ in 0..30 {
                let run = honest_collision_prover(&i, backend, &mut rng).unwrap();
                assert_eq!(run.depth, 4);
                assert_eq!(run.trace.is_some(), backend != ProverBackend::StructuredBranch);
                if verify_collision_hashing(&i, &run.solution).unwrap() == Verdict::Accept {
                    accepted += 1;
                }
            }
            assert!(accepted > 5, "{backend:?}: {accepted}");
        }
        let lifted = i.lift_recursive(1).unwrap();
        assert!(honest_collision_prover(&lifted, ProverBackend::FullStatevector, &mut rng).is_err());
    }
}
