use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::TruthTable;

use super::state::{Mat2, Mat4, C64};

/// Allowed deviation of `U†U` from the identity.
pub const UNITARY_TOL: f64 = 1e-9;

const O: C64 = C64::new(0.0, 0.0);
const I1: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Single {
        qubit: usize,
        matrix: Mat2,
    },
    /// Matrix rows and columns are ordered `bit(q0)·2 + bit(q1)`.
    Double {
        qubits: [usize; 2],
        matrix: Mat4,
    },
}

impl Gate {
    pub fn h(q: usize) -> Self {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        Gate::Single {
            qubit: q,
            matrix: [[s, s], [s, -s]],
        }
    }

    pub fn x(q: usize) -> Self {
        Gate::Single {
            qubit: q,
            matrix: [[O, I1], [I1, O]],
        }
    }

    pub fn z(q: usize) -> Self {
        Gate::Single {
            qubit: q,
            matrix: [[I1, O], [O, -I1]],
        }
    }

    pub fn s(q: usize) -> Self {
        Gate::Single {
            qubit: q,
            matrix: [[I1, O], [O, C64::new(0.0, 1.0)]],
        }
    }

    pub fn phase(q: usize, theta: f64) -> Self {
        Gate::Single {
            qubit: q,
            matrix: [[I1, O], [O, C64::from_polar(1.0, theta)]],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        let mut m = [[O; 4]; 4];
        m[0][0] = I1;
        m[1][1] = I1;
        m[2][3] = I1;
        m[3][2] = I1;
        Gate::Double {
            qubits: [control, target],
            matrix: m,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        let mut m = [[O; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = if i == 3 { -I1 } else { I1 };
        }
        Gate::Double {
            qubits: [a, b],
            matrix: m,
        }
    }

    pub fn qubits(&self) -> &[usize] {
        match self {
            Gate::Single { qubit, .. } => std::slice::from_ref(qubit),
            Gate::Double { qubits, .. } => qubits,
        }
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        match self {
            Gate::Single { matrix, .. } => deviation(&matrix.map(|r| r.to_vec())),
            Gate::Double { matrix, .. } => deviation(&matrix.map(|r| r.to_vec())),
        }
    }

    /// For gates that map basis states to basis states up to a phase, the
    /// image of local basis index `i`.
    pub fn basis_image(&self, i: usize) -> Option<usize> {
        let col: Vec<C64> = match self {
            Gate::Single { matrix, .. } => matrix.iter().map(|r| r[i]).collect(),
            Gate::Double { matrix, .. } => matrix.iter().map(|r| r[i]).collect(),
        };
        let nz: Vec<usize> = (0..col.len()).filter(|&r| col[r].norm() > UNITARY_TOL).collect();
        match nz.as_slice() {
            [r] if (col[*r].norm() - 1.0).abs() < UNITARY_TOL => Some(*r),
            _ => None,
        }
    }
}

fn deviation(m: &[Vec<C64>]) -> f64 {
    let n = m.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: C64 = (0..n).map(|k| m[k][i].conj() * m[k][j]).sum();
            let want = if i == j { I1 } else { O };
            worst = worst.max((dot - want).norm());
        }
    }
    worst
}

/// One layer of gates on pairwise disjoint qubits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GateLayer {
    gates: Vec<Gate>,
}

impl GateLayer {
    pub fn new(gates: Vec<Gate>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for g in &gates {
            if let [a, b] = g.qubits() {
                if a == b {
                    return Err(Error::QubitClash(*a));
                }
            }
            for &q in g.qubits() {
                if !seen.insert(q) {
                    return Err(Error::QubitClash(q));
                }
            }
            let dev = g.unitarity_deviation();
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary {
                    qubits: g.qubits().to_vec(),
                    deviation: dev,
                });
            }
        }
        Ok(GateLayer { gates })
    }

    pub fn identity() -> Self {
        GateLayer::default()
    }

    pub fn hadamards(qubits: impl IntoIterator<Item = usize>) -> Self {
        GateLayer::new(qubits.into_iter().map(Gate::h).collect()).expect("distinct qubits")
    }

    pub fn xs(qubits: impl IntoIterator<Item = usize>) -> Self {
        GateLayer::new(qubits.into_iter().map(Gate::x).collect()).expect("distinct qubits")
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.gates.iter().flat_map(|g| g.qubits().iter().copied())
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.qubits().max()
    }

    /// Joins two layers; fails if they share a qubit.
    pub fn merge(mut self, other: GateLayer) -> Result<Self> {
        self.gates.extend(other.gates);
        GateLayer::new(self.gates)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleMode {
    /// `|x⟩|a⟩ -> |x⟩|a ⊕ f(x)⟩`
    Xor { response: Vec<usize> },
    /// `|x⟩|z⟩ -> (−1)^{z·f(x)}|x⟩|z⟩`
    Phase { z: Vec<usize> },
}

/// Table-backed oracle gate.
#[derive(Debug, Clone)]
pub struct OracleGate {
    pub mode: OracleMode,
    pub table: Arc<TruthTable>,
    pub query: Vec<usize>,
}

impl OracleGate {
    pub fn xor(table: Arc<TruthTable>, query: Vec<usize>, response: Vec<usize>) -> Result<Self> {
        Self::checked(OracleMode::Xor { response }, table, query)
    }

    pub fn phase(table: Arc<TruthTable>, query: Vec<usize>, z: Vec<usize>) -> Result<Self> {
        Self::checked(OracleMode::Phase { z }, table, query)
    }

    fn checked(mode: OracleMode, table: Arc<TruthTable>, query: Vec<usize>) -> Result<Self> {
        if query.len() != table.in_bits() {
            return Err(Error::WidthMismatch {
                expected: table.in_bits(),
                got: query.len(),
            });
        }
        let out = match &mode {
            OracleMode::Xor { response } => response.len(),
            OracleMode::Phase { z } => z.len(),
        };
        if out != table.out_bits() {
            return Err(Error::WidthMismatch {
                expected: table.out_bits(),
                got: out,
            });
        }
        let g = OracleGate { mode, table, query };
        let mut seen = std::collections::HashSet::new();
        for q in g.qubits() {
            if !seen.insert(q) {
                return Err(Error::QubitClash(q));
            }
        }
        Ok(g)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        let extra = match &self.mode {
            OracleMode::Xor { response } => response,
            OracleMode::Phase { z } => z,
        };
        self.query.iter().chain(extra).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gates_are_unitary() {
        for g in [
            Gate::h(0),
            Gate::x(0),
            Gate::z(0),
            Gate::s(0),
            Gate::phase(0, 0.3),
            Gate::cnot(0, 1),
            Gate::cz(0, 1),
        ] {
            assert!(g.unitarity_deviation() < UNITARY_TOL, "{g:?}");
        }
    }

    #[test]
    fn layer_rejects_overlap_and_non_unitary() {
        assert!(matches!(
            GateLayer::new(vec![Gate::h(0), Gate::cnot(1, 0)]),
            Err(Error::QubitClash(0))
        ));
        assert!(matches!(
            GateLayer::new(vec![Gate::cnot(2, 2)]),
            Err(Error::QubitClash(2))
        ));
        let bad = Gate::Single {
            qubit: 0,
            matrix: [[I1, I1], [O, I1]],
        };
        assert!(matches!(GateLayer::new(vec![bad]), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn basis_images() {
        assert_eq!(Gate::x(0).basis_image(0), Some(1));
        assert_eq!(Gate::z(0).basis_image(1), Some(1));
        assert_eq!(Gate::h(0).basis_image(0), None);
        assert_eq!(Gate::cnot(0, 1).basis_image(2), Some(3));
    }

    #[test]
    fn oracle_gate_checks_widths() {
        let t = Arc::new(TruthTable::from_fn(2, 1, |x| x & 1));
        assert!(OracleGate::xor(t.clone(), vec![0, 1], vec![2]).is_ok());
        assert!(matches!(
            OracleGate::xor(t.clone(), vec![0], vec![2]),
            Err(Error::WidthMismatch { .. })
        ));
        assert!(matches!(
            OracleGate::phase(t, vec![0, 1], vec![1]),
            Err(Error::QubitClash(1))
        ));
    }
}
