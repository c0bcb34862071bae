//! Dense statevector simulation with a quantum-depth ledger.

mod gates;
mod state;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gates::{Gate, GateLayer, OracleGate, OracleMode, UNITARY_TOL};
pub(crate) use state::sample_index;
pub use state::{register_value, scatter, Mat2, Mat4, StateVector, C64, MAX_QUBITS};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Layers and oracle rounds applied so far. Every parallel oracle round costs 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthCounter {
    pub layers_applied: usize,
    pub oracle_calls: usize,
    pub depth: usize,
}

impl DepthCounter {
    pub fn add_layer(&mut self) {
        self.layers_applied += 1;
        self.depth += 1;
    }

    pub fn add_oracle_round(&mut self) {
        self.oracle_calls += 1;
        self.depth += 1;
    }
}

#[derive(Debug, Clone)]
pub struct Simulator {
    pub state: StateVector,
    pub depth: DepthCounter,
}

impl Simulator {
    pub fn new(num_qubits: usize) -> Result<Self> {
        Ok(Simulator {
            state: StateVector::new(num_qubits)?,
            depth: DepthCounter::default(),
        })
    }

    pub fn from_state(state: StateVector) -> Self {
        Simulator {
            state,
            depth: DepthCounter::default(),
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.state.num_qubits() {
            return Err(Error::param(format!(
                "qubit {q} outside a {}-qubit state",
                self.state.num_qubits()
            )));
        }
        Ok(())
    }

    pub fn apply_layer(&mut self, layer: &GateLayer) -> Result<()> {
        for q in layer.qubits() {
            self.check_qubit(q)?;
        }
        for g in layer.gates() {
            match g {
                Gate::Single { qubit, matrix } => self.state.apply_single(*qubit, matrix),
                Gate::Double { qubits, matrix } => self.state.apply_double(qubits[0], qubits[1], matrix),
            }
        }
        self.depth.add_layer();
        Ok(())
    }

    /// Applies every copy in one round; copies must use disjoint qubits.
    pub fn apply_oracle(&mut self, copies: &[OracleGate]) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for g in copies {
            for q in g.qubits() {
                self.check_qubit(q)?;
                if !seen.insert(q) {
                    return Err(Error::QubitClash(q));
                }
            }
        }
        for g in copies {
            let t = &g.table;
            let f = |x: u64| t.get(x);
            match &g.mode {
                OracleMode::Xor { response } => self.state.apply_xor_oracle(&g.query, response, &f),
                OracleMode::Phase { z } => self.state.apply_phase_oracle(&g.query, z, &f),
            }
        }
        self.depth.add_oracle_round();
        Ok(())
    }

    /// Computational-basis measurement of `qubits`, read MSB first.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<BitString> {
        if qubits.is_empty() {
            return Err(Error::param("measurement needs at least one qubit"));
        }
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let v = self.state.measure(qubits, rng);
        Ok(BitString::from_u64(v, qubits.len()))
    }

    /// A Hadamard layer on `register` followed by its measurement.
    pub fn hadamard_measure<R: Rng + ?Sized>(&mut self, register: &[usize], rng: &mut R) -> Result<BitString> {
        self.apply_layer(&GateLayer::hadamards(register.iter().copied()))?;
        self.measure(register, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::TruthTable;
    use crate::seed::Seed;
    use crate::stats;
    use proptest::prelude::*;
    use rand::Rng;
    use std::sync::Arc;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn hadamards_give_uniform_superposition() {
        let mut s = Simulator::new(5).unwrap();
        s.apply_layer(&GateLayer::hadamards(0..5)).unwrap();
        let want = 2f64.powf(-2.5);
        assert!(s.state.amplitudes().iter().all(|a| close(*a, C64::new(want, 0.0))));
        assert_eq!(s.depth.depth, 1);
    }

    #[test]
    fn identity_layer_still_costs_depth() {
        let mut s = Simulator::new(3).unwrap();
        let before = s.state.clone();
        s.apply_layer(&GateLayer::identity()).unwrap();
        assert_eq!(s.state, before);
        assert_eq!(
            s.depth,
            DepthCounter {
                layers_applied: 1,
                oracle_calls: 0,
                depth: 1
            }
        );
    }

    fn random_unitary2(rng: &mut impl Rng) -> Mat4 {
        // Gram-Schmidt on a random complex matrix
        let mut cols: Vec<[C64; 4]> = Vec::new();
        while cols.len() < 4 {
            let mut v: [C64; 4] =
                std::array::from_fn(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            for c in &cols {
                let p: C64 = (0..4).map(|k| c[k].conj() * v[k]).sum();
                for k in 0..4 {
                    v[k] -= p * c[k];
                }
            }
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            cols.push(v.map(|a| a / n));
        }
        std::array::from_fn(|r| std::array::from_fn(|c| cols[c][r]))
    }

    #[test]
    fn random_two_qubit_layer_preserves_norm() {
        let mut rng = Seed::from_u64(3).rng();
        let mut s = Simulator::new(6).unwrap();
        s.apply_layer(&GateLayer::hadamards(0..6)).unwrap();
        for _ in 0..20 {
            let layer = GateLayer::new(vec![
                Gate::Double {
                    qubits: [0, 3],
                    matrix: random_unitary2(&mut rng),
                },
                Gate::Double {
                    qubits: [5, 1],
                    matrix: random_unitary2(&mut rng),
                },
                Gate::h(2),
            ])
            .unwrap();
            s.apply_layer(&layer).unwrap();
            assert!((s.state.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_oracle_flips_marked_branch() {
        // qubits: x = [0, 1], z = [2]; x0 = 01, x1 = 10, H(x0) = 0, H(x1) = 1
        let t = Arc::new(TruthTable::from_fn(2, 1, |x| (x == 0b10) as u64));
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0b101] = C64::new(s2, 0.0); // z=1, x=01 (qubit 0 holds the low x bit)
        amps[0b110] = C64::new(s2, 0.0); // z=1, x=10
        let mut s = Simulator::from_state(StateVector::from_amplitudes(amps).unwrap());
        // register [1, 0] reads qubit 1 as the high bit
        s.apply_oracle(&[OracleGate::phase(t, vec![1, 0], vec![2]).unwrap()])
            .unwrap();
        assert!(close(s.state.amplitudes()[0b101], C64::new(s2, 0.0)));
        assert!(close(s.state.amplitudes()[0b110], C64::new(-s2, 0.0)));
    }

    #[test]
    fn xor_oracle_writes_value_on_basis_input() {
        let t = Arc::new(TruthTable::from_fn(3, 2, |x| (x * 3) & 3));
        for x in 0..8u64 {
            let mut s = Simulator::from_state(StateVector::basis(5, scatter(x, &[0, 1, 2])).unwrap());
            s.apply_oracle(&[OracleGate::xor(t.clone(), vec![0, 1, 2], vec![3, 4]).unwrap()])
                .unwrap();
            let mut rng = Seed::from_u64(x).rng();
            assert_eq!(s.measure(&[3, 4], &mut rng).unwrap().to_u64(), (x * 3) & 3);
        }
    }

    #[test]
    fn parallel_copies_cost_one_round() {
        let t = Arc::new(TruthTable::from_fn(1, 1, |x| x));
        let mut s = Simulator::new(4).unwrap();
        s.apply_oracle(&[
            OracleGate::xor(t.clone(), vec![0], vec![1]).unwrap(),
            OracleGate::xor(t.clone(), vec![2], vec![3]).unwrap(),
        ])
        .unwrap();
        assert_eq!(s.depth.depth, 1);
        assert_eq!(s.depth.oracle_calls, 1);
        let clash = [
            OracleGate::xor(t.clone(), vec![0], vec![1]).unwrap(),
            OracleGate::xor(t, vec![1], vec![3]).unwrap(),
        ];
        assert!(matches!(s.apply_oracle(&clash), Err(Error::QubitClash(1))));
    }

    #[test]
    fn oracle_matrices_are_permutation_and_diagonal() {
        let mut rng = Seed::from_u64(11).rng();
        for n in 1..=6 {
            let vals: Vec<u64> = (0..1u64 << n).map(|_| rng.random_range(0..2)).collect();
            let t = Arc::new(TruthTable::from_fn(n, 1, |x| vals[x as usize]));
            let q: Vec<usize> = (0..n).collect();
            for col in 0..1u64 << (n + 1) {
                let mut xs = StateVector::basis(n + 1, col).unwrap();
                xs.apply_xor_oracle(&q, &[n], &|x| t.get(x));
                let nz: Vec<_> = xs.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
                assert_eq!(nz.len(), 1);
                assert!(close(*nz[0], C64::new(1.0, 0.0)));
                let mut ps = StateVector::basis(n + 1, col).unwrap();
                ps.apply_phase_oracle(&q, &[n], &|x| t.get(x));
                assert!((ps.amplitudes()[col as usize].norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measuring_zero_state() {
        let mut s = Simulator::new(4).unwrap();
        let mut rng = Seed::from_u64(0).rng();
        for _ in 0..10 {
            assert_eq!(s.measure(&[0, 1, 2, 3], &mut rng).unwrap(), BitString::zeros(4));
        }
        assert!(s.measure(&[], &mut rng).is_err());
    }

    #[test]
    fn image_measurement_leaves_preimage_superposition() {
        // x on qubits 0..3, g(x) on 3..5
        let g = |x: u64| (x * 5 + 1) % 4;
        let t = Arc::new(TruthTable::from_fn(3, 2, g));
        let mut rng = Seed::from_u64(5).rng();
        for _ in 0..20 {
            let mut s = Simulator::new(5).unwrap();
            s.apply_layer(&GateLayer::hadamards(0..3)).unwrap();
            s.apply_oracle(&[OracleGate::xor(t.clone(), vec![0, 1, 2], vec![3, 4]).unwrap()])
                .unwrap();
            let y = s.measure(&[3, 4], &mut rng).unwrap().to_u64();
            let pre: Vec<u64> = (0..8).filter(|&x| g(x) == y).collect();
            let p = s.state.probabilities(&[0, 1, 2]);
            for x in 0..8u64 {
                let want = if pre.contains(&x) { 1.0 / pre.len() as f64 } else { 0.0 };
                assert!((p[x as usize] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn born_frequencies_match_amplitudes() {
        let raw = [0.1, 0.3, 0.0, 0.2, 0.15, 0.05, 0.1, 0.1];
        let amps: Vec<C64> = raw.iter().map(|p: &f64| C64::new(p.sqrt(), 0.0)).collect();
        let base = StateVector::from_amplitudes(amps).unwrap();
        let mut rng = Seed::from_u64(8).rng();
        let shots = 10_000u64;
        let mut counts = [0u64; 8];
        for _ in 0..shots {
            let mut s = Simulator::from_state(base.clone());
            counts[s.measure(&[2, 1, 0], &mut rng).unwrap().to_u64() as usize] += 1;
        }
        for (c, &p) in counts.iter().zip(&raw) {
            let f = *c as f64 / shots as f64;
            assert!((f - p).abs() <= 3.0 * stats::sigma(p, shots) + 1e-12, "{f} vs {p}");
        }
    }

    #[test]
    fn hadamard_measure_cases() {
        let mut rng = Seed::from_u64(9).rng();
        let mut s = Simulator::new(3).unwrap();
        s.apply_layer(&GateLayer::hadamards(0..3)).unwrap();
        assert_eq!(s.hadamard_measure(&[0, 1, 2], &mut rng).unwrap(), BitString::zeros(3));
        assert_eq!(s.depth.depth, 2);
        let mut seen = [false; 8];
        for _ in 0..200 {
            let mut s = Simulator::new(3).unwrap();
            seen[s.hadamard_measure(&[0, 1, 2], &mut rng).unwrap().to_u64() as usize] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    /// Exact interference: outcome probabilities on a marked two-branch state.
    fn interference(x0: u64, x1: u64, h0: u64, h1: u64, n: usize) -> Vec<f64> {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let sign = |h: u64| if h == 1 { -s2 } else { s2 };
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        let q: Vec<usize> = (0..n).collect();
        amps[scatter(x0, &q) as usize] += C64::new(sign(h0), 0.0);
        amps[scatter(x1, &q) as usize] += C64::new(sign(h1), 0.0);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        for k in 0..n {
            if let Gate::Single { matrix, .. } = Gate::h(k) {
                s.apply_single(k, &matrix);
            }
        }
        s.probabilities(&q)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn affine_law_holds_for_every_outcome(n in 1usize..7, a in any::<u64>(), b in any::<u64>(), h0 in 0u64..2, h1 in 0u64..2) {
            let mask = (1u64 << n) - 1;
            let (x0, x1) = (a & mask, b & mask);
            prop_assume!(x0 != x1);
            let p = interference(x0, x1, h0, h1, n);
            for (r, &pr) in p.iter().enumerate() {
                let lhs = ((r as u64 & (x0 ^ x1)).count_ones() & 1) as u64;
                if lhs != h0 ^ h1 {
                    prop_assert!(pr < 1e-9);
                }
            }
        }
    }
}
