//! The honest h-CollisionHashing prover. It measures `y` mid-circuit,
//! evaluates `h(y)` classically through the stage oracles, and writes it back
//! before the phase query, so its quantum depth does not grow with `d`.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::{
    run_qc, write_bits_layer, Backend, ClassicalOracles, DepthBudget, OracleCall, OracleSet, QOp, QcAction, QcStrategy,
    RunOptions, RunTrace,
};
use crate::problems::hcollision::{G, H};
use crate::problems::{HCollisionInstance, HCollisionSolution, HCollisionTriple};
use crate::qsim::{Gate, GateLayer};

use super::ProverRun;

/// Quantum depth of the strategy: superpose, `G`, write `h(y)`, phase, Hadamard.
pub const H_PROVER_DEPTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Superpose,
    QueryG,
    MeasureY,
    WriteH,
    Phase,
    Hadamard,
    MeasureX,
    Done,
}

/// QC strategy for `reps` parallel repetitions.
pub struct HonestHStrategy {
    lambda: usize,
    d: usize,
    reps: usize,
    stage: Stage,
    ys: Vec<BitString>,
}

impl HonestHStrategy {
    pub fn new(inst: &HCollisionInstance, reps: usize) -> Self {
        HonestHStrategy {
            lambda: inst.lambda(),
            d: inst.d(),
            reps,
            stage: Stage::Superpose,
            ys: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        3 * self.lambda + 2
    }

    fn b(&self, rep: usize) -> usize {
        rep * self.width()
    }

    fn x(&self, rep: usize) -> Vec<usize> {
        let s = self.b(rep) + 1;
        (s..s + self.lambda).collect()
    }

    fn bx(&self, rep: usize) -> Vec<usize> {
        let s = self.b(rep);
        (s..s + self.lambda + 1).collect()
    }

    fn y(&self, rep: usize) -> Vec<usize> {
        let s = self.b(rep) + self.lambda + 1;
        (s..s + self.lambda).collect()
    }

    fn t(&self, rep: usize) -> Vec<usize> {
        let s = self.b(rep) + 2 * self.lambda + 1;
        (s..s + self.lambda).collect()
    }

    fn z(&self, rep: usize) -> usize {
        self.b(rep) + 3 * self.lambda + 1
    }

    /// `h(y)` by chaining the stage oracles classically.
    fn eval_h(&self, y: &BitString, oracles: &mut ClassicalOracles<'_>) -> Result<BitString> {
        let mut v = y.clone();
        for j in 0..=self.d {
            v = oracles.query(&format!("H{j}"), &v)?;
        }
        Ok(v)
    }

    /// Splits the final outcome over `(b, x)` of every repetition into triples.
    pub fn decode(&self, ys: &[BitString], bx: &BitString) -> Vec<HCollisionTriple> {
        let w = self.lambda + 1;
        ys.iter()
            .enumerate()
            .map(|(i, y)| HCollisionTriple {
                y: y.clone(),
                m: bx.get(i * w),
                r: bx.slice(i * w + 1, (i + 1) * w),
            })
            .collect()
    }
}

impl QcStrategy for HonestHStrategy {
    fn num_qubits(&self) -> usize {
        self.reps * self.width()
    }

    fn step(&mut self, last: Option<&BitString>, oracles: &mut ClassicalOracles<'_>) -> Result<QcAction> {
        let reps = 0..self.reps;
        let action = match self.stage {
            Stage::Superpose => {
                let mut gates = Vec::new();
                for i in reps {
                    gates.extend(self.bx(i).into_iter().map(Gate::h));
                    gates.push(Gate::x(self.z(i)));
                }
                self.stage = Stage::QueryG;
                QcAction::Apply(QOp::Layer(GateLayer::new(gates)?))
            }
            Stage::QueryG => {
                self.stage = Stage::MeasureY;
                QcAction::Apply(QOp::Oracle(
                    reps.map(|i| OracleCall::xor(G, self.bx(i), self.y(i))).collect(),
                ))
            }
            Stage::MeasureY => {
                self.stage = Stage::WriteH;
                QcAction::Measure(reps.flat_map(|i| self.y(i)).collect())
            }
            Stage::WriteH => {
                let out = last.ok_or_else(|| Error::Structural("no y outcome before writing h(y)".into()))?;
                let l = self.lambda;
                self.ys = (0..self.reps).map(|i| out.slice(i * l, (i + 1) * l)).collect();
                let mut gates = Vec::new();
                for i in reps {
                    let h = self.eval_h(&self.ys[i], oracles)?;
                    gates.extend(write_bits_layer(&self.t(i), &h));
                }
                self.stage = Stage::Phase;
                QcAction::Apply(QOp::Layer(GateLayer::new(gates)?))
            }
            Stage::Phase => {
                self.stage = Stage::Hadamard;
                QcAction::Apply(QOp::Oracle(
                    reps.map(|i| {
                        let mut q = self.x(i);
                        q.extend(self.t(i));
                        OracleCall::phase(H, q, vec![self.z(i)])
                    })
                    .collect(),
                ))
            }
            Stage::Hadamard => {
                self.stage = Stage::MeasureX;
                QcAction::Apply(QOp::Layer(GateLayer::hadamards(reps.flat_map(|i| self.bx(i)))))
            }
            Stage::MeasureX => {
                self.stage = Stage::Done;
                QcAction::Measure(reps.flat_map(|i| self.bx(i)).collect())
            }
            Stage::Done => {
                let bx = last.ok_or_else(|| Error::Structural("no final outcome".into()))?;
                let mut out = BitString::empty();
                for t in self.decode(&self.ys, bx) {
                    out.extend(&t.y);
                    out.extend(&t.r);
                    out.push(t.m);
                }
                QcAction::Finish(out)
            }
        };
        Ok(action)
    }
}

/// Splits `y || r || m` records back into a solution.
pub fn decode_h_output(bits: &BitString, lambda: usize) -> Result<HCollisionSolution> {
    let w = 2 * lambda + 1;
    if bits.len() % w != 0 {
        return Err(Error::Decode(format!(
            "{} bits is not a whole number of triples",
            bits.len()
        )));
    }
    let triples = (0..bits.len() / w)
        .map(|i| {
            let b = i * w;
            HCollisionTriple {
                y: bits.slice(b, b + lambda),
                r: bits.slice(b + lambda, b + 2 * lambda),
                m: bits.get(b + 2 * lambda),
            }
        })
        .collect();
    Ok(HCollisionSolution { triples })
}

/// λ parallel repetitions in one QC segment of depth [`H_PROVER_DEPTH`].
pub fn honest_h_collision_prover<R: Rng + ?Sized>(
    inst: &HCollisionInstance,
    backend: Backend,
    rng: &mut R,
) -> Result<ProverRun<HCollisionSolution>> {
    honest_h_collision_prover_with(inst, &inst.oracles(), backend, rng)
}

/// As [`honest_h_collision_prover`] with a prebuilt `inst.oracles()`, whose
/// cached tables then survive across trials.
pub fn honest_h_collision_prover_with<R: Rng + ?Sized>(
    inst: &HCollisionInstance,
    oracles: &OracleSet,
    backend: Backend,
    rng: &mut R,
) -> Result<ProverRun<HCollisionSolution>> {
    let l = inst.lambda();
    let mut strategy = HonestHStrategy::new(inst, l);
    let trace: RunTrace = run_qc(
        DepthBudget::single(H_PROVER_DEPTH),
        &mut strategy,
        oracles,
        RunOptions {
            backend,
            query_budget: None,
        },
        rng,
    )?;
    let solution = decode_h_output(&trace.output, l)?;
    Ok(ProverRun {
        solution,
        depth: trace.max_depth(),
        trace: Some(trace),
    })
}
