use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::QueryLog;
use crate::qsim::{DepthCounter, Gate};

use super::machine::{Backend, Machine};
use super::program::{ClassicalOracles, DepthBudget, Model, OracleSet, QOp, QProgram};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub segment: usize,
    pub qubits: Vec<usize>,
    pub outcome: BitString,
}

/// Record of one hybrid run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTrace {
    pub model: Model,
    pub budget: DepthBudget,
    pub backend: Backend,
    /// One depth ledger per quantum segment.
    pub segments: Vec<DepthCounter>,
    pub measurements: Vec<Measurement>,
    /// Classical queries issued by classical parts.
    pub queries: QueryLog,
    pub output: BitString,
}

impl RunTrace {
    fn new(model: Model, budget: DepthBudget, backend: Backend) -> Self {
        RunTrace {
            model,
            budget,
            backend,
            segments: Vec::new(),
            measurements: Vec::new(),
            queries: QueryLog::new(),
            output: BitString::empty(),
        }
    }

    pub fn max_depth(&self) -> usize {
        self.segments.iter().map(|s| s.depth).max().unwrap_or(0)
    }

    pub fn total_oracle_rounds(&self) -> usize {
        self.segments.iter().map(|s| s.oracle_calls).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// Execution settings shared by all runners.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub backend: Backend,
    /// Cap on classical queries per run; `None` is unbounded.
    pub query_budget: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            backend: Backend::Sparse,
            query_budget: None,
        }
    }
}

/// A quantum segment in progress: machine, ledger and budget.
struct Segment<'a> {
    machine: Machine,
    depth: DepthCounter,
    budget: DepthBudget,
    oracles: &'a OracleSet,
}

impl<'a> Segment<'a> {
    fn new(num_qubits: usize, budget: DepthBudget, oracles: &'a OracleSet, backend: Backend) -> Self {
        Segment {
            machine: Machine::new(num_qubits, backend),
            depth: DepthCounter::default(),
            budget,
            oracles,
        }
    }

    fn check(&self, op: &QOp) -> Result<()> {
        self.budget.admit(self.depth.depth, op)?;
        let n = self.machine.num_qubits();
        let mut seen = vec![false; n];
        for q in op.qubits() {
            if q >= n {
                return Err(Error::param(format!("qubit {q} outside a {n}-qubit segment")));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::QubitClash(q));
            }
        }
        if let QOp::Oracle(calls) = op {
            for c in calls {
                let f = self.oracles.quantum(&c.oracle)?;
                if c.query.len() != f.in_bits() {
                    return Err(Error::WidthMismatch {
                        expected: f.in_bits(),
                        got: c.query.len(),
                    });
                }
                if c.target.qubits().len() != f.out_bits() {
                    return Err(Error::WidthMismatch {
                        expected: f.out_bits(),
                        got: c.target.qubits().len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Applies `op`; after each gate, measures the qubits in `then_measure`
    /// that the gate touched.
    fn apply<R: Rng + ?Sized>(&mut self, op: &QOp, then_measure: &[usize], rng: &mut R) -> Result<()> {
        self.check(op)?;
        match op {
            QOp::Layer(layer) => {
                for g in layer.gates() {
                    self.machine.apply_gate(g)?;
                    let done: Vec<usize> = g
                        .qubits()
                        .iter()
                        .copied()
                        .filter(|q| then_measure.contains(q))
                        .collect();
                    if !done.is_empty() {
                        self.machine.measure(&done, rng);
                    }
                }
                self.depth.add_layer();
            }
            QOp::Oracle(calls) => {
                for c in calls {
                    let f = self.oracles.quantum(&c.oracle)?;
                    self.machine.apply_oracle(f.as_ref(), &c.query, &c.target)?;
                }
                if !then_measure.is_empty() {
                    self.machine.measure(then_measure, rng);
                }
                self.depth.add_oracle_round();
            }
        }
        Ok(())
    }
}

fn run_program<R: Rng + ?Sized>(
    budget: DepthBudget,
    program: &QProgram,
    oracles: &OracleSet,
    backend: Backend,
    rng: &mut R,
) -> Result<(DepthCounter, BitString)> {
    let n = program.num_qubits;
    // last op touching each qubit; each qubit is measured right after it
    let mut last = vec![None; n];
    for (i, op) in program.ops.iter().enumerate() {
        for q in op.qubits() {
            if q < n {
                last[q] = Some(i);
            }
        }
    }
    let mut seg = Segment::new(n, budget, oracles, backend);
    for (i, op) in program.ops.iter().enumerate() {
        let done: Vec<usize> = (0..n).filter(|&q| last[q] == Some(i)).collect();
        seg.apply(op, &done, rng)?;
    }
    for &q in &program.measure {
        if q >= n {
            return Err(Error::param(format!("measured qubit {q} outside a {n}-qubit program")));
        }
    }
    let out = seg.machine.measure(&program.measure, rng);
    Ok((seg.depth, out))
}

/// Runs a fixed-depth circuit and measures `program.measure`.
pub fn run_qnc<R: Rng + ?Sized>(
    budget: DepthBudget,
    program: &QProgram,
    oracles: &OracleSet,
    opts: RunOptions,
    rng: &mut R,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(Model::Qnc, budget, opts.backend);
    let (depth, out) = run_program(budget, program, oracles, opts.backend, rng)?;
    trace.segments.push(depth);
    trace.measurements.push(Measurement {
        segment: 0,
        qubits: program.measure.clone(),
        outcome: out.clone(),
    });
    trace.output = out;
    Ok(trace)
}

/// What the classical side of a QC segment does next.
#[derive(Debug, Clone)]
pub enum QcAction {
    Apply(QOp),
    Measure(Vec<usize>),
    Finish(BitString),
}

/// Classical control of a QC segment. `last` is the outcome of the previous
/// `Measure`, delivered once.
pub trait QcStrategy {
    fn num_qubits(&self) -> usize;
    fn step(&mut self, last: Option<&BitString>, oracles: &mut ClassicalOracles<'_>) -> Result<QcAction>;
}

fn run_qc_segment<R: Rng + ?Sized>(
    index: usize,
    budget: DepthBudget,
    strategy: &mut dyn QcStrategy,
    oracles: &OracleSet,
    opts: RunOptions,
    trace: &mut RunTrace,
    rng: &mut R,
) -> Result<BitString> {
    let mut seg = Segment::new(strategy.num_qubits(), budget, oracles, opts.backend);
    let mut last: Option<BitString> = None;
    loop {
        let action = {
            let mut handle = ClassicalOracles::new(oracles, &mut trace.queries, opts.query_budget);
            strategy.step(last.as_ref(), &mut handle)?
        };
        last = None;
        match action {
            QcAction::Apply(op) => seg.apply(&op, &[], rng)?,
            QcAction::Measure(qs) => {
                if let Some(&q) = qs.iter().find(|&&q| q >= seg.machine.num_qubits()) {
                    return Err(Error::param(format!("measured qubit {q} outside the segment")));
                }
                let out = seg.machine.measure(&qs, rng);
                trace.measurements.push(Measurement {
                    segment: index,
                    qubits: qs,
                    outcome: out.clone(),
                });
                last = Some(out);
            }
            QcAction::Finish(out) => {
                trace.segments.push(seg.depth);
                return Ok(out);
            }
        }
    }
}

/// One quantum segment with classical computation and partial measurements
/// between its layers.
pub fn run_qc<R: Rng + ?Sized>(
    budget: DepthBudget,
    strategy: &mut dyn QcStrategy,
    oracles: &OracleSet,
    opts: RunOptions,
    rng: &mut R,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(Model::Qc, budget, opts.backend);
    trace.output = run_qc_segment(0, budget, strategy, oracles, opts, &mut trace, rng)?;
    Ok(trace)
}

pub enum CqAction {
    Run(QProgram),
    /// Runs against a different oracle view, e.g. a salted copy of the run's oracles.
    RunWith(QProgram, Arc<OracleSet>),
    Finish(BitString),
}

/// Classical driver of a CQ computation; `last` is the previous segment's
/// full measurement record.
pub trait CqStrategy {
    fn step(&mut self, last: Option<&BitString>, oracles: &mut ClassicalOracles<'_>) -> Result<CqAction>;
}

/// Up to `m` fully measured circuits with classical processing between them.
pub fn run_cq<R: Rng + ?Sized>(
    budget: DepthBudget,
    strategy: &mut dyn CqStrategy,
    oracles: &OracleSet,
    opts: RunOptions,
    rng: &mut R,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(Model::Cq, budget, opts.backend);
    let mut last: Option<BitString> = None;
    loop {
        let action = {
            let mut handle = ClassicalOracles::new(oracles, &mut trace.queries, opts.query_budget);
            strategy.step(last.as_ref(), &mut handle)?
        };
        let (program, set) = match action {
            CqAction::Finish(out) => {
                trace.output = out;
                return Ok(trace);
            }
            CqAction::Run(p) => (p, None),
            CqAction::RunWith(p, s) => (p, Some(s)),
        };
        let view = set.as_deref().unwrap_or(oracles);
        {
            {
                let index = trace.segments.len();
                if index + 1 > budget.m {
                    return Err(Error::SegmentOverflow {
                        attempted: index + 1,
                        m: budget.m,
                    });
                }
                let mut covered = vec![false; program.num_qubits];
                for &q in &program.measure {
                    if q < covered.len() {
                        covered[q] = true;
                    }
                }
                if let Some(q) = covered.iter().position(|c| !c) {
                    return Err(Error::Structural(format!(
                        "segment {index} leaves qubit {q} unmeasured"
                    )));
                }
                let (depth, out) = run_program(budget, &program, view, opts.backend, rng)?;
                trace.segments.push(depth);
                trace.measurements.push(Measurement {
                    segment: index,
                    qubits: program.measure.clone(),
                    outcome: out.clone(),
                });
                last = Some(out);
            }
        }
    }
}

pub enum CqcAction {
    Run(Box<dyn QcStrategy>),
    RunWith(Box<dyn QcStrategy>, Arc<OracleSet>),
    Finish(BitString),
}

pub trait CqcStrategy {
    fn step(&mut self, last: Option<&BitString>, oracles: &mut ClassicalOracles<'_>) -> Result<CqcAction>;
}

/// Up to `m` QC segments chained by classical computation.
pub fn run_cqc<R: Rng + ?Sized>(
    budget: DepthBudget,
    strategy: &mut dyn CqcStrategy,
    oracles: &OracleSet,
    opts: RunOptions,
    rng: &mut R,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(Model::Cqc, budget, opts.backend);
    let mut last: Option<BitString> = None;
    loop {
        let action = {
            let mut handle = ClassicalOracles::new(oracles, &mut trace.queries, opts.query_budget);
            strategy.step(last.as_ref(), &mut handle)?
        };
        let (mut seg, set) = match action {
            CqcAction::Finish(out) => {
                trace.output = out;
                return Ok(trace);
            }
            CqcAction::Run(s) => (s, None),
            CqcAction::RunWith(s, o) => (s, Some(o)),
        };
        let view = set.as_deref().unwrap_or(oracles);
        {
            {
                let index = trace.segments.len();
                if index + 1 > budget.m {
                    return Err(Error::SegmentOverflow {
                        attempted: index + 1,
                        m: budget.m,
                    });
                }
                last = Some(run_qc_segment(
                    index,
                    budget,
                    seg.as_mut(),
                    view,
                    opts,
                    &mut trace,
                    rng,
                )?);
            }
        }
    }
}

/// Replays a fixed program as a QC strategy with no classical parts.
pub struct ProgramStrategy {
    program: QProgram,
    next: usize,
    measured: bool,
}

impl ProgramStrategy {
    pub fn new(program: QProgram) -> Self {
        ProgramStrategy {
            program,
            next: 0,
            measured: false,
        }
    }
}

impl QcStrategy for ProgramStrategy {
    fn num_qubits(&self) -> usize {
        self.program.num_qubits
    }

    fn step(&mut self, last: Option<&BitString>, _: &mut ClassicalOracles<'_>) -> Result<QcAction> {
        if let Some(op) = self.program.ops.get(self.next) {
            self.next += 1;
            return Ok(QcAction::Apply(op.clone()));
        }
        if !self.measured {
            self.measured = true;
            return Ok(QcAction::Measure(self.program.measure.clone()));
        }
        Ok(QcAction::Finish(last.cloned().unwrap_or_default()))
    }
}

/// A CQ computation seen as a CQC one: each program becomes a QC segment.
pub struct CqAsCqc<S: CqStrategy>(pub S);

impl<S: CqStrategy> CqcStrategy for CqAsCqc<S> {
    fn step(&mut self, last: Option<&BitString>, oracles: &mut ClassicalOracles<'_>) -> Result<CqcAction> {
        Ok(match self.0.step(last, oracles)? {
            CqAction::Run(p) => CqcAction::Run(Box::new(ProgramStrategy::new(p))),
            CqAction::RunWith(p, o) => CqcAction::RunWith(Box::new(ProgramStrategy::new(p)), o),
            CqAction::Finish(out) => CqcAction::Finish(out),
        })
    }
}

/// A single QC segment seen as a CQC computation with `m = 1`.
pub struct QcAsCqc {
    inner: Option<Box<dyn QcStrategy>>,
}

impl QcAsCqc {
    pub fn new(inner: Box<dyn QcStrategy>) -> Self {
        QcAsCqc { inner: Some(inner) }
    }
}

impl CqcStrategy for QcAsCqc {
    fn step(&mut self, last: Option<&BitString>, _: &mut ClassicalOracles<'_>) -> Result<CqcAction> {
        Ok(match self.inner.take() {
            Some(s) => CqcAction::Run(s),
            None => CqcAction::Finish(last.cloned().unwrap_or_default()),
        })
    }
}

/// Applies X on every qubit of `qubits` whose bit in `value` is set.
pub fn write_bits_layer(qubits: &[usize], value: &BitString) -> Vec<Gate> {
    qubits
        .iter()
        .enumerate()
        .filter(|(j, _)| value.get(*j))
        .map(|(_, &q)| Gate::x(q))
        .collect()
}
