//! Factorized quantum state: each qubit is either a known classical bit or a
//! member of an entangled block. Blocks merge when an operation spans them and
//! shrink as their qubits are measured.

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::bits::BitString;
use crate::error::Result;
use crate::oracle::BitFunction;
use crate::qsim::{register_value, sample_index, Gate, GateLayer, StateVector, C64};

use super::program::Target;

/// Amplitudes below this modulus are dropped from sparse blocks.
pub const PRUNE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Blocks are dense state vectors.
    Dense,
    /// Blocks are hash maps over nonzero basis states.
    #[default]
    Sparse,
}

type Key = SmallVec<[u64; 4]>;

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
fn kget(k: &Key, i: usize) -> bool {
    (k[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
fn kflip(k: &mut Key, i: usize) {
    k[i / 64] ^= 1 << (i % 64);
}

fn kset(k: &mut Key, i: usize, v: bool) {
    if kget(k, i) != v {
        kflip(k, i);
    }
}

fn read_bits(k: &Key, pos: &[usize]) -> BitString {
    let mut b = BitString::zeros(pos.len());
    for (j, &p) in pos.iter().enumerate() {
        if kget(k, p) {
            b.set(j, true);
        }
    }
    b
}

fn read_u64(k: &Key, pos: &[usize]) -> u64 {
    pos.iter().fold(0, |acc, &p| (acc << 1) | kget(k, p) as u64)
}

#[derive(Debug, Clone)]
pub struct SparseState {
    n: usize,
    amps: FxHashMap<Key, C64>,
}

impl SparseState {
    fn basis(n: usize, bits: &[bool]) -> Self {
        let mut k: Key = smallvec![0; words(n)];
        for (i, &b) in bits.iter().enumerate() {
            kset(&mut k, i, b);
        }
        let mut amps = FxHashMap::default();
        amps.insert(k, C64::new(1.0, 0.0));
        SparseState { n, amps }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    fn map_local(&mut self, arity: usize, pos: &[usize], col: impl Fn(usize) -> Vec<(usize, C64)>) {
        let mut out: FxHashMap<Key, C64> = FxHashMap::default();
        out.reserve(self.amps.len() * 2);
        for (k, a) in self.amps.drain() {
            let local = pos.iter().fold(0usize, |acc, &p| (acc << 1) | kget(&k, p) as usize);
            debug_assert!(local < 1 << arity);
            for (row, coef) in col(local) {
                let mut k2 = k.clone();
                for (j, &p) in pos.iter().enumerate() {
                    kset(&mut k2, p, (row >> (arity - 1 - j)) & 1 == 1);
                }
                *out.entry(k2).or_insert(C64::new(0.0, 0.0)) += coef * a;
            }
        }
        out.retain(|_, a| a.norm() >= PRUNE);
        self.amps = out;
    }

    fn apply_gate(&mut self, gate: &Gate, pos: &[usize]) {
        match gate {
            Gate::Single { matrix, .. } => {
                let m = *matrix;
                self.map_local(1, pos, |c| {
                    (0..2).map(|r| (r, m[r][c])).filter(|(_, v)| v.norm() > 0.0).collect()
                })
            }
            Gate::Double { matrix, .. } => {
                let m = *matrix;
                self.map_local(2, pos, |c| {
                    (0..4).map(|r| (r, m[r][c])).filter(|(_, v)| v.norm() > 0.0).collect()
                })
            }
        }
    }

    fn xor_oracle(&mut self, f: &dyn BitFunction, q: &[usize], t: &[usize]) {
        let narrow = q.len() <= 64 && t.len() <= 64;
        let old = std::mem::take(&mut self.amps);
        let mut out = FxHashMap::default();
        out.reserve(old.len());
        for (mut k, a) in old {
            if narrow {
                let fx = f.apply_u64(read_u64(&k, q));
                for (j, &p) in t.iter().enumerate() {
                    if (fx >> (t.len() - 1 - j)) & 1 == 1 {
                        kflip(&mut k, p);
                    }
                }
            } else {
                let fx = f.apply(&read_bits(&k, q));
                for (j, &p) in t.iter().enumerate() {
                    if fx.get(j) {
                        kflip(&mut k, p);
                    }
                }
            }
            out.insert(k, a);
        }
        self.amps = out;
    }

    fn phase_oracle(&mut self, f: &dyn BitFunction, q: &[usize], z: &[usize]) {
        let narrow = q.len() <= 64 && z.len() <= 64;
        for (k, a) in self.amps.iter_mut() {
            let odd = if narrow {
                let zv = read_u64(k, z);
                zv != 0 && (f.apply_u64(read_u64(k, q)) & zv).count_ones() & 1 == 1
            } else {
                let zb = read_bits(k, z);
                zb.count_ones() > 0 && f.apply(&read_bits(k, q)).dot(&zb)
            };
            if odd {
                *a = -*a;
            }
        }
    }

    fn measure_discard<R: Rng + ?Sized>(&self, pos: &[usize], rng: &mut R) -> (Vec<bool>, SparseState) {
        let mut probs: FxHashMap<BitString, f64> = FxHashMap::default();
        for (k, a) in &self.amps {
            *probs.entry(read_bits(k, pos)).or_insert(0.0) += a.norm_sqr();
        }
        let mut outcomes: Vec<(BitString, f64)> = probs.into_iter().collect();
        outcomes.sort_by(|a, b| a.0.cmp(&b.0));
        let p: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
        let pick = sample_index(&p, rng);
        let (outcome, po) = outcomes.swap_remove(pick);
        let scale = 1.0 / po.sqrt();
        let keep: Vec<usize> = (0..self.n).filter(|i| !pos.contains(i)).collect();
        let n2 = keep.len();
        let mut amps = FxHashMap::default();
        for (k, a) in &self.amps {
            if read_bits(k, pos) == outcome {
                let mut k2: Key = smallvec![0; words(n2)];
                for (j, &i) in keep.iter().enumerate() {
                    if kget(k, i) {
                        kflip(&mut k2, j);
                    }
                }
                amps.insert(k2, a * scale);
            }
        }
        (outcome.iter().collect(), SparseState { n: n2, amps })
    }

    fn tensor(&self, other: &SparseState) -> SparseState {
        let n = self.n + other.n;
        let mut amps = FxHashMap::default();
        amps.reserve(self.amps.len() * other.amps.len());
        for (k1, a1) in &self.amps {
            for (k2, a2) in &other.amps {
                let mut k: Key = smallvec![0; words(n)];
                k[..k1.len()].copy_from_slice(k1);
                for i in 0..other.n {
                    if kget(k2, i) {
                        kflip(&mut k, self.n + i);
                    }
                }
                amps.insert(k, a1 * a2);
            }
        }
        SparseState { n, amps }
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone)]
enum BlockState {
    Dense(StateVector),
    Sparse(SparseState),
}

impl BlockState {
    fn basis(backend: Backend, bits: &[bool]) -> Result<Self> {
        Ok(match backend {
            Backend::Dense => {
                let idx = bits
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
                BlockState::Dense(StateVector::basis(bits.len(), idx)?)
            }
            Backend::Sparse => BlockState::Sparse(SparseState::basis(bits.len(), bits)),
        })
    }

    fn apply_gate(&mut self, gate: &Gate, pos: &[usize]) {
        match (self, gate) {
            (BlockState::Dense(s), Gate::Single { matrix, .. }) => s.apply_single(pos[0], matrix),
            (BlockState::Dense(s), Gate::Double { matrix, .. }) => s.apply_double(pos[0], pos[1], matrix),
            (BlockState::Sparse(s), g) => s.apply_gate(g, pos),
        }
    }

    fn oracle(&mut self, f: &dyn BitFunction, q: &[usize], target: &[usize], phase: bool) {
        match self {
            BlockState::Dense(s) => {
                let g = |x: u64| f.apply_u64(x);
                if phase {
                    s.apply_phase_oracle(q, target, &g)
                } else {
                    s.apply_xor_oracle(q, target, &g)
                }
            }
            BlockState::Sparse(s) => {
                if phase {
                    s.phase_oracle(f, q, target)
                } else {
                    s.xor_oracle(f, q, target)
                }
            }
        }
    }

    fn measure_discard<R: Rng + ?Sized>(&self, pos: &[usize], rng: &mut R) -> (Vec<bool>, BlockState) {
        match self {
            BlockState::Dense(s) => {
                let (v, rest) = s.measure_discard(pos, rng);
                let bits = BitString::from_u64(v, pos.len()).iter().collect();
                (bits, BlockState::Dense(rest))
            }
            BlockState::Sparse(s) => {
                let (bits, rest) = s.measure_discard(pos, rng);
                (bits, BlockState::Sparse(rest))
            }
        }
    }

    fn tensor(&self, other: &BlockState) -> Result<BlockState> {
        Ok(match (self, other) {
            (BlockState::Dense(a), BlockState::Dense(b)) => BlockState::Dense(a.tensor(b)?),
            (BlockState::Sparse(a), BlockState::Sparse(b)) => BlockState::Sparse(a.tensor(b)),
            _ => unreachable!("one backend per machine"),
        })
    }

    fn norm_sqr(&self) -> f64 {
        match self {
            BlockState::Dense(s) => s.norm_sqr(),
            BlockState::Sparse(s) => s.norm_sqr(),
        }
    }

    fn support(&self) -> usize {
        match self {
            BlockState::Dense(s) => s.amplitudes().len(),
            BlockState::Sparse(s) => s.len(),
        }
    }
}

#[derive(Debug, Clone)]
struct Block {
    members: Vec<usize>,
    state: BlockState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Classical(bool),
    Quantum(usize),
}

/// The quantum machine behind every hybrid runner.
#[derive(Debug, Clone)]
pub struct Machine {
    backend: Backend,
    slots: Vec<Slot>,
    blocks: Vec<Option<Block>>,
}

impl Machine {
    pub fn new(num_qubits: usize, backend: Backend) -> Self {
        Machine {
            backend,
            slots: vec![Slot::Classical(false); num_qubits],
            blocks: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.slots.len()
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Largest number of stored amplitudes among live blocks.
    pub fn max_support(&self) -> usize {
        self.blocks
            .iter()
            .flatten()
            .map(|b| b.state.support())
            .max()
            .unwrap_or(1)
    }

    /// The known value of a qubit that is not entangled with anything.
    pub fn classical_value(&self, q: usize) -> Option<bool> {
        match self.slots[q] {
            Slot::Classical(b) => Some(b),
            Slot::Quantum(_) => None,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().flatten().map(|b| b.state.norm_sqr()).product()
    }

    fn promote(&mut self, q: usize) -> Result<usize> {
        match self.slots[q] {
            Slot::Quantum(b) => Ok(b),
            Slot::Classical(v) => {
                let id = self.blocks.len();
                self.blocks.push(Some(Block {
                    members: vec![q],
                    state: BlockState::basis(self.backend, &[v])?,
                }));
                self.slots[q] = Slot::Quantum(id);
                Ok(id)
            }
        }
    }

    /// Puts all of `qs` into one block and returns its id.
    fn unify(&mut self, qs: &[usize]) -> Result<usize> {
        let mut ids = Vec::new();
        for &q in qs {
            let b = self.promote(q)?;
            if !ids.contains(&b) {
                ids.push(b);
            }
        }
        let root = ids[0];
        for &other in &ids[1..] {
            let ob = self.blocks[other].take().expect("live block");
            let rb = self.blocks[root].as_mut().expect("live block");
            rb.state = rb.state.tensor(&ob.state)?;
            for &m in &ob.members {
                self.slots[m] = Slot::Quantum(root);
            }
            rb.members.extend(ob.members);
        }
        Ok(root)
    }

    fn local(&self, block: usize, qs: &[usize]) -> Vec<usize> {
        let members = &self.blocks[block].as_ref().expect("live block").members;
        qs.iter()
            .map(|q| members.iter().position(|m| m == q).expect("member"))
            .collect()
    }

    pub fn apply_layer(&mut self, layer: &GateLayer) -> Result<()> {
        for g in layer.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let qs = gate.qubits();
        let classical: Option<Vec<bool>> = qs.iter().map(|&q| self.classical_value(q)).collect();
        if let Some(bits) = classical {
            let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            if let Some(img) = gate.basis_image(idx) {
                // a phase on a product factor is global
                for (j, &q) in qs.iter().enumerate() {
                    self.slots[q] = Slot::Classical((img >> (qs.len() - 1 - j)) & 1 == 1);
                }
                return Ok(());
            }
        }
        let b = self.unify(qs)?;
        let pos = self.local(b, qs);
        self.blocks[b].as_mut().unwrap().state.apply_gate(gate, &pos);
        Ok(())
    }

    pub fn apply_oracle(&mut self, f: &dyn BitFunction, query: &[usize], target: &Target) -> Result<()> {
        let classical: Option<Vec<bool>> = query.iter().map(|&q| self.classical_value(q)).collect();
        if let Some(bits) = classical {
            let fx = f.apply(&BitString::from_bits(&bits));
            for (j, &t) in target.qubits().iter().enumerate() {
                if fx.get(j) {
                    match target {
                        Target::Xor(_) => self.apply_gate(&Gate::x(t))?,
                        Target::Phase(_) => self.apply_gate(&Gate::z(t))?,
                    }
                }
            }
            return Ok(());
        }
        let all: Vec<usize> = query.iter().chain(target.qubits()).copied().collect();
        let b = self.unify(&all)?;
        let qp = self.local(b, query);
        let tp = self.local(b, target.qubits());
        let phase = matches!(target, Target::Phase(_));
        self.blocks[b].as_mut().unwrap().state.oracle(f, &qp, &tp, phase);
        Ok(())
    }

    /// Measures `qubits` in the computational basis; they become classical.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> BitString {
        let mut by_block: Vec<(usize, Vec<usize>)> = Vec::new();
        for &q in qubits {
            if let Slot::Quantum(b) = self.slots[q] {
                match by_block.iter_mut().find(|(id, _)| *id == b) {
                    Some((_, v)) => {
                        if !v.contains(&q) {
                            v.push(q)
                        }
                    }
                    None => by_block.push((b, vec![q])),
                }
            }
        }
        for (b, qs) in by_block {
            let pos = self.local(b, &qs);
            let block = self.blocks[b].as_mut().unwrap();
            let (bits, rest) = block.state.measure_discard(&pos, rng);
            for (&q, &v) in qs.iter().zip(&bits) {
                self.slots[q] = Slot::Classical(v);
            }
            block.members.retain(|m| !qs.contains(m));
            if block.members.is_empty() {
                self.blocks[b] = None;
            } else {
                block.state = rest;
            }
        }
        let bits: Vec<bool> = qubits.iter().map(|&q| self.classical_value(q).unwrap()).collect();
        BitString::from_bits(&bits)
    }

    /// Exact joint distribution of `qubits` without disturbing the machine.
    /// Only for small registers; used by tests.
    pub fn distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let mut m = self.clone();
        let b = m.unify(qubits)?;
        let pos = m.local(b, qubits);
        let block = m.blocks[b].as_ref().unwrap();
        let mut p = vec![0.0; 1 << qubits.len()];
        match &block.state {
            BlockState::Dense(s) => {
                for (i, a) in s.amplitudes().iter().enumerate() {
                    p[register_value(i as u64, &pos) as usize] += a.norm_sqr();
                }
            }
            BlockState::Sparse(s) => {
                for (k, a) in &s.amps {
                    p[read_u64(k, &pos) as usize] += a.norm_sqr();
                }
            }
        }
        Ok(p)
    }
}
