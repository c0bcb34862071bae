//! h-CollisionHashing: claws between `G0` and `G1` hashed through `H(x, h(y))`
//! with `h` a composed chain.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::{Access, OracleSet};
use crate::oracle::{
    compose_recursive, derive_suboracle, salt, truth_table, BitFunction, ComposedOracle, FnFunction, QueryLog,
    RandomOracle, TruthTable, TABLE_CAP,
};
use crate::seed::Seed;

use super::constants::capital_c;
use super::verdict::{first_duplicate, RejectReason, Verdict};
use super::{Descriptor, ProblemKind, ENUM_CAP};

pub const G0: &str = "G0";
pub const G1: &str = "G1";
/// `G(b || x) = G_b(x)`, a single quantum oracle over both branches.
pub const G: &str = "G";
pub const H: &str = "H";

#[derive(Debug, Clone)]
pub struct HCollisionInstance {
    lambda: usize,
    seed: Seed,
    pk: BitString,
    g0: RandomOracle,
    g1: RandomOracle,
    h_eq: RandomOracle,
    h: ComposedOracle,
}

impl HCollisionInstance {
    pub fn new(seed: Seed, lambda: usize, d: usize, pk: &BitString) -> Result<Self> {
        if lambda < 1 {
            return Err(Error::param("lambda must be positive"));
        }
        let mut root = RandomOracle::root(seed, "h-collision-hashing");
        if !pk.is_empty() {
            root = salt(&root, pk);
        }
        Ok(HCollisionInstance {
            lambda,
            seed,
            pk: pk.clone(),
            g0: derive_suboracle(&root, b"G0", lambda, lambda),
            g1: derive_suboracle(&root, b"G1", lambda, lambda),
            h_eq: derive_suboracle(&root, b"H", 2 * lambda, 1),
            h: compose_recursive(&root, lambda, d, lambda)?,
        })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn d(&self) -> usize {
        self.h.d()
    }

    pub fn g0(&self) -> &RandomOracle {
        &self.g0
    }

    pub fn g1(&self) -> &RandomOracle {
        &self.g1
    }

    pub fn h_eq(&self) -> &RandomOracle {
        &self.h_eq
    }

    pub fn h(&self) -> &ComposedOracle {
        &self.h
    }

    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            problem: ProblemKind::HCollisionHashing,
            lambda: self.lambda,
            d: Some(self.d()),
            seed: self.seed,
            pk: self.pk.clone(),
        }
    }

    pub fn tables(&self) -> Result<(TruthTable, TruthTable)> {
        if self.lambda > ENUM_CAP {
            return Err(Error::CapExceeded {
                what: "h-collision enumeration lambda",
                needed: self.lambda,
                cap: ENUM_CAP,
            });
        }
        Ok((truth_table(&self.g0, TABLE_CAP)?, truth_table(&self.g1, TABLE_CAP)?))
    }

    /// `G0`, `G1`, the joint `G`, and `H` with quantum access; the stages of
    /// `h` as `H0…Hd` with classical access only.
    pub fn oracles(&self) -> OracleSet {
        let (g0, g1) = (self.g0.clone(), self.g1.clone());
        let l = self.lambda;
        let joint = FnFunction::new(l + 1, l, move |bx: &BitString| {
            let x = bx.slice(1, l + 1);
            if bx.get(0) {
                g1.apply(&x)
            } else {
                g0.apply(&x)
            }
        });
        let mut set = OracleSet::new();
        set.insert(G0, Arc::new(self.g0.clone()), Access::Quantum)
            .insert(G1, Arc::new(self.g1.clone()), Access::Quantum)
            .insert(G, Arc::new(joint), Access::Quantum)
            .insert(H, Arc::new(self.h_eq.clone()), Access::Quantum);
        for (j, s) in self.h.stages().iter().enumerate() {
            set.insert(&format!("H{j}"), Arc::new(s.clone()), Access::ClassicalOnly);
        }
        set
    }
}

/// Image points with exactly one preimage under each of `G0` and `G1`.
pub fn two_to_one_set(g0: &TruthTable, g1: &TruthTable) -> Result<BTreeSet<u64>> {
    let p0 = g0.preimages(ENUM_CAP)?;
    let p1 = g1.preimages(ENUM_CAP)?;
    Ok((0..p0.len().min(p1.len()))
        .filter(|&y| p0[y].len() == 1 && p1[y].len() == 1)
        .map(|y| y as u64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HCollisionTriple {
    pub y: BitString,
    pub r: BitString,
    pub m: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HCollisionSolution {
    pub triples: Vec<HCollisionTriple>,
}

/// The unique claw `(x0, x1)` over `y`, when `y ∈ TwoToOne`.
fn claw(g0: &[Vec<u64>], g1: &[Vec<u64>], y: u64) -> Option<(u64, u64)> {
    let (a, b) = (&g0[y as usize], &g1[y as usize]);
    (a.len() == 1 && b.len() == 1).then(|| (a[0], b[0]))
}

pub fn verify_h_collision(inst: &HCollisionInstance, sol: &HCollisionSolution) -> Result<Verdict> {
    let (t0, t1) = inst.tables()?;
    verify_h_with_tables(inst, &t0, &t1, sol, &mut QueryLog::new())
}

pub fn verify_h_with_tables(
    inst: &HCollisionInstance,
    t0: &TruthTable,
    t1: &TruthTable,
    sol: &HCollisionSolution,
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
        if t.y.len() != l || t.r.len() != l {
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
    let (p0, p1) = (t0.preimages(ENUM_CAP)?, t1.preimages(ENUM_CAP)?);
    let mut indices = 0;
    let mut wins = 0;
    for t in &sol.triples {
        let Some((x0, x1)) = claw(&p0, &p1, t.y.to_u64()) else {
            continue;
        };
        indices += 1;
        let (x0, x1) = (BitString::from_u64(x0, l), BitString::from_u64(x1, l));
        let hy = inst.h.eval_logged(&t.y, log)?;
        let e = log.eval(&inst.h_eq, &x0.concat(&hy))?.get(0) ^ log.eval(&inst.h_eq, &x1.concat(&hy))?.get(0);
        if t.m == t.r.dot(&x0.xor(&x1)) ^ e {
            wins += 1;
        }
    }
    let c = capital_c();
    if ((4 * indices) as f64) < 3.0 * c * l as f64 {
        return Ok(Verdict::Reject(RejectReason::TooFewIndices {
            found: indices,
            lambda: l,
        }));
    }
    if 4 * wins < 3 * indices {
        return Ok(Verdict::Reject(RejectReason::TooFewValid { valid: wins, indices }));
    }
    Ok(Verdict::Accept)
}

/// First `λ` points of `TwoToOne` with `r = 0` and the matching `m`.
pub fn brute_force_h_collision(inst: &HCollisionInstance) -> Result<Option<HCollisionSolution>> {
    let l = inst.lambda;
    let (t0, t1) = inst.tables()?;
    let set = two_to_one_set(&t0, &t1)?;
    let (p0, p1) = (t0.preimages(ENUM_CAP)?, t1.preimages(ENUM_CAP)?);
    let chosen: Vec<u64> = set.iter().copied().take(l).collect();
    if ((4 * chosen.len()) as f64) < 3.0 * capital_c() * l as f64 {
        return Ok(None);
    }
    let mut triples = Vec::with_capacity(l);
    for &y in &chosen {
        let (x0, x1) = claw(&p0, &p1, y).expect("member of TwoToOne");
        let yb = BitString::from_u64(y, l);
        let hy = inst.h.eval(&yb)?;
        let m = inst.h_eq.eval(&BitString::from_u64(x0, l).concat(&hy))?.get(0)
            ^ inst.h_eq.eval(&BitString::from_u64(x1, l).concat(&hy))?.get(0);
        triples.push(HCollisionTriple {
            y: yb,
            r: BitString::zeros(l),
            m,
        });
    }
    let mut filler = (0..1u64 << l).filter(|y| !set.contains(y));
    while triples.len() < l {
        let y = filler
            .next()
            .ok_or_else(|| Error::param("codomain too small to pad the solution"))?;
        triples.push(HCollisionTriple {
            y: BitString::from_u64(y, l),
            r: BitString::zeros(l),
            m: false,
        });
    }
    Ok(Some(HCollisionSolution { triples }))
}
