//! CollisionHashing and its recursive lift.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::{Access, OracleSet};
use crate::oracle::{
    compose_recursive, derive_suboracle, salt, truth_table, BitFunction, ComposedOracle, QueryLog, RandomOracle,
    TruthTable, TABLE_CAP,
};
use crate::seed::Seed;

use super::constants::c_for_lambda;
use super::verdict::{first_duplicate, RejectReason, Verdict};
use super::{Descriptor, ProblemKind, ENUM_CAP};

pub const G: &str = "g";
pub const H_PRIME: &str = "H'";
/// Classical-only handle on the whole lifted chain.
pub const H_TILDE: &str = "H~";

pub fn stage_name(j: usize) -> String {
    format!("H{j}")
}

/// The oracle the affine equation is evaluated with.
#[derive(Debug, Clone)]
pub enum EquationOracle {
    Direct(RandomOracle),
    Lifted(ComposedOracle),
}

impl EquationOracle {
    pub fn eval_bit(&self, x: &BitString) -> Result<bool> {
        Ok(match self {
            EquationOracle::Direct(o) => o.eval(x)?.get(0),
            EquationOracle::Lifted(c) => c.eval(x)?.get(0),
        })
    }

    pub fn eval_logged(&self, x: &BitString, log: &mut QueryLog) -> Result<bool> {
        Ok(match self {
            EquationOracle::Direct(o) => log.eval(o, x)?.get(0),
            EquationOracle::Lifted(c) => c.eval_logged(x, log)?.get(0),
        })
    }

    pub fn lift_depth(&self) -> Option<usize> {
        match self {
            EquationOracle::Direct(_) => None,
            EquationOracle::Lifted(c) => Some(c.d()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CollisionInstance {
    lambda: usize,
    seed: Seed,
    pk: BitString,
    root: RandomOracle,
    g: RandomOracle,
    equation: EquationOracle,
    c: BigRational,
}

impl CollisionInstance {
    /// Keyless when `pk` is empty, otherwise every oracle is salted with `pk`.
    pub fn new(seed: Seed, lambda: usize, pk: &BitString) -> Result<Self> {
        let mut root = RandomOracle::root(seed, "collision-hashing");
        if !pk.is_empty() {
            root = salt(&root, pk);
        }
        let mut inst = Self::from_root(root, lambda)?;
        inst.seed = seed;
        inst.pk = pk.clone();
        Ok(inst)
    }

    /// Builds the instance from an arbitrary width-free root.
    pub fn from_root(root: RandomOracle, lambda: usize) -> Result<Self> {
        if lambda < 1 {
            return Err(Error::param("lambda must be positive"));
        }
        let g = derive_suboracle(&root, b"g", lambda + 1, lambda);
        let hp = derive_suboracle(&root, b"H'", lambda + 1, 1);
        Ok(CollisionInstance {
            lambda,
            seed: root.seed(),
            pk: BitString::empty(),
            c: c_for_lambda(lambda)?,
            root,
            g,
            equation: EquationOracle::Direct(hp),
        })
    }

    /// `Rec_d`: the equation oracle becomes `H_d ∘ … ∘ H_0` over `Σ = {0,1}^{λ+1}`;
    /// `g` stays direct.
    pub fn lift_recursive(&self, d: usize) -> Result<Self> {
        let c = compose_recursive(&self.root, self.lambda + 1, d, 1)?;
        Ok(CollisionInstance {
            equation: EquationOracle::Lifted(c),
            ..self.clone()
        })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn pk(&self) -> &BitString {
        &self.pk
    }

    pub fn g(&self) -> &RandomOracle {
        &self.g
    }

    pub fn equation(&self) -> &EquationOracle {
        &self.equation
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    pub fn lift_depth(&self) -> Option<usize> {
        self.equation.lift_depth()
    }

    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            problem: ProblemKind::CollisionHashing,
            lambda: self.lambda,
            d: self.lift_depth(),
            seed: self.seed,
            pk: self.pk.clone(),
        }
    }

    pub fn g_table(&self) -> Result<TruthTable> {
        if self.lambda > ENUM_CAP {
            return Err(Error::CapExceeded {
                what: "collision enumeration lambda",
                needed: self.lambda,
                cap: ENUM_CAP,
            });
        }
        truth_table(&self.g, TABLE_CAP)
    }

    /// Oracles for quantum provers: `g`, and either `H'` or the stages `H0…Hd`.
    /// The full lifted chain is also present as classical-only `H~`.
    pub fn oracles(&self) -> OracleSet {
        let mut set = OracleSet::new();
        set.insert(G, Arc::new(self.g.clone()), Access::Quantum);
        match &self.equation {
            EquationOracle::Direct(h) => {
                set.insert(H_PRIME, Arc::new(h.clone()), Access::Quantum);
            }
            EquationOracle::Lifted(c) => {
                for (j, s) in c.stages().iter().enumerate() {
                    set.insert(&stage_name(j), Arc::new(s.clone()), Access::Quantum);
                }
                set.insert(
                    H_TILDE,
                    Arc::new(c.clone()) as Arc<dyn BitFunction>,
                    Access::ClassicalOnly,
                );
            }
        }
        set
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollisionTriple {
    pub y: BitString,
    pub m: bool,
    pub r: BitString,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionSolution {
    pub triples: Vec<CollisionTriple>,
}

impl CollisionSolution {
    /// `y || m || r` for every triple, in order.
    pub fn encode(&self) -> BitString {
        let mut out = BitString::empty();
        for t in &self.triples {
            out.extend(&t.y);
            out.push(t.m);
            out.extend(&t.r);
        }
        out
    }

    pub fn decode(bits: &BitString, lambda: usize) -> Result<Self> {
        let w = 2 * lambda + 2;
        if bits.len() != w * lambda {
            return Err(Error::Decode(format!(
                "expected {} bits, got {}",
                w * lambda,
                bits.len()
            )));
        }
        let triples = (0..lambda)
            .map(|i| {
                let b = i * w;
                CollisionTriple {
                    y: bits.slice(b, b + lambda),
                    m: bits.get(b + lambda),
                    r: bits.slice(b + lambda + 1, b + w),
                }
            })
            .collect();
        Ok(CollisionSolution { triples })
    }
}

/// Exact threshold checks for `|I|/λ > 3c/4` and `count/|I| > 3/4`.
fn index_threshold(indices: usize, lambda: usize, c: &BigRational) -> bool {
    let lhs = BigInt::from(4 * indices) * c.denom();
    let rhs = BigInt::from(3 * lambda) * c.numer();
    lhs > rhs
}

fn valid_threshold(valid: usize, indices: usize) -> bool {
    4 * valid > 3 * indices
}

/// `r·(z0 ⊕ z1) ⊕ E(z0) ⊕ E(z1)` for the two preimages of one image point.
pub fn claw_parity(eq: &EquationOracle, z0: &BitString, z1: &BitString, r: &BitString) -> Result<bool> {
    Ok(r.dot(&z0.xor(z1)) ^ eq.eval_bit(z0)? ^ eq.eval_bit(z1)?)
}

pub fn verify_collision_hashing(inst: &CollisionInstance, sol: &CollisionSolution) -> Result<Verdict> {
    let table = inst.g_table()?;
    verify_with_table(inst, &table, sol, &mut QueryLog::new())
}

/// Verification against a pre-computed table of `g`; equation queries are
/// recorded in `log`.
pub fn verify_with_table(
    inst: &CollisionInstance,
    table: &TruthTable,
    sol: &CollisionSolution,
    log: &mut QueryLog,
) -> Result<Verdict> {
    let l = inst.lambda;
    if sol.triples.len() != l {
        return Ok(Verdict::malformed(format!(
            "expected {l} triples, got {}",
            sol.triples.len()
        )));
    }
    for (i, t) in sol.triples.iter().enumerate() {
        if t.y.len() != l || t.r.len() != l + 1 {
            return Ok(Verdict::malformed(format!(
                "triple {i} has widths y={} r={}",
                t.y.len(),
                t.r.len()
            )));
        }
    }
    if let Some((first, second)) = first_duplicate(sol.triples.iter().map(|t| &t.y)) {
        return Ok(Verdict::Reject(RejectReason::Duplicate { first, second }));
    }
    let pre = table.preimages(ENUM_CAP)?;
    let mut indices = 0;
    let mut valid = 0;
    for t in &sol.triples {
        let p = &pre[t.y.to_u64() as usize];
        if p.len() != 2 {
            continue;
        }
        indices += 1;
        let z0 = BitString::from_u64(p[0], l + 1);
        let z1 = BitString::from_u64(p[1], l + 1);
        let e = inst.equation.eval_logged(&z0, log)? ^ inst.equation.eval_logged(&z1, log)?;
        if t.m == t.r.dot(&z0.xor(&z1)) ^ e {
            valid += 1;
        }
    }
    if !index_threshold(indices, l, &inst.c) {
        return Ok(Verdict::Reject(RejectReason::TooFewIndices {
            found: indices,
            lambda: l,
        }));
    }
    if !valid_threshold(valid, indices) {
        return Ok(Verdict::Reject(RejectReason::TooFewValid { valid, indices }));
    }
    Ok(Verdict::Accept)
}

/// Smallest `λ` image points with two preimages, `r = 0` and the matching `m`;
/// `None` when the draw has too few such points to pass.
pub fn brute_force_collision(inst: &CollisionInstance) -> Result<Option<CollisionSolution>> {
    let l = inst.lambda;
    let pre = inst.g_table()?.preimages(ENUM_CAP)?;
    let twos: Vec<usize> = (0..pre.len()).filter(|&y| pre[y].len() == 2).collect();
    let take = twos.len().min(l);
    if !index_threshold(take, l, &inst.c) {
        return Ok(None);
    }
    let mut triples = Vec::with_capacity(l);
    for &y in &twos[..take] {
        let z0 = BitString::from_u64(pre[y][0], l + 1);
        let z1 = BitString::from_u64(pre[y][1], l + 1);
        let m = inst.equation.eval_bit(&z0)? ^ inst.equation.eval_bit(&z1)?;
        triples.push(CollisionTriple {
            y: BitString::from_u64(y as u64, l),
            m,
            r: BitString::zeros(l + 1),
        });
    }
    let mut filler = (0..pre.len()).filter(|&y| pre[y].len() != 2);
    while triples.len() < l {
        let y = filler
            .next()
            .ok_or_else(|| Error::param("codomain too small to pad the solution"))?;
        triples.push(CollisionTriple {
            y: BitString::from_u64(y as u64, l),
            m: false,
            r: BitString::zeros(l + 1),
        });
    }
    Ok(Some(CollisionSolution { triples }))
}
