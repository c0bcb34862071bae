//! Base sets and set matrices over the stages of a composed oracle.
//!
//! Sets are sorted `Vec<u64>` of stage inputs. Row 0 of a matrix is the base
//! sets `S_{01} … S_{0d}`; row `i` is `S̄_i = (S_{i1} … S_{id})`.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ComposedOracle;

/// Largest base-set size the lab will materialise.
pub const SET_CAP: usize = 1 << 16;
/// Largest path-query set per stage.
pub const PATH_CAP: usize = 256;

pub type Set = Vec<u64>;

pub fn contains(s: &[u64], x: u64) -> bool {
    s.binary_search(&x).is_ok()
}

pub fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().all(|&x| contains(b, x))
}

fn sorted(mut v: Vec<u64>) -> Set {
    v.sort_unstable();
    v.dedup();
    v
}

/// `H_j(S)` as a set; smaller than `S` when `H_j` collides on it.
pub fn image(c: &ComposedOracle, j: usize, s: &[u64]) -> Set {
    sorted(s.iter().map(|&x| c.stage(j).eval_u64(x)).collect())
}

/// `|Σ|` for the composed oracle's symbol width.
pub fn alphabet(c: &ComposedOracle) -> usize {
    1 << c.sigma_bits()
}

fn check_shape(c: &ComposedOracle) -> Result<usize> {
    if c.d() == 0 {
        return Err(Error::param("set constructions need d ≥ 1"));
    }
    if c.mid_bits() > 40 {
        return Err(Error::param(format!(
            "stage domain of {} bits is too wide",
            c.mid_bits()
        )));
    }
    let n = alphabet(c)
        .checked_pow(c.d() as u32 + 2)
        .filter(|&n| n <= SET_CAP)
        .ok_or_else(|| Error::param(format!("|Σ|^(d+2) exceeds the set cap {SET_CAP}")))?;
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    /// Some `H_i` collides on `S_{0i}` (condition 2(a)).
    BaseShrank { stage: usize },
    /// `H_0` collides on `Σ` (condition 2(b)).
    SigmaImageShrank,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSets {
    pub d: usize,
    pub sigma: usize,
    /// `S_1 … S_d`, the images of `Σ` through the chain.
    pub sigma_paths: Vec<Set>,
    /// `S_{01} … S_{0d}`.
    pub base: Vec<Set>,
    pub abort: Option<AbortReason>,
}

impl BaseSets {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    /// `S_i` for `1 ≤ i ≤ d`.
    pub fn s(&self, i: usize) -> &[u64] {
        &self.sigma_paths[i - 1]
    }

    /// `S_{0i}` for `1 ≤ i ≤ d`.
    pub fn s0(&self, i: usize) -> &[u64] {
        &self.base[i - 1]
    }
}

/// Uniform `n`-subset of `{0,1}^bits` containing `forced`, sampled as `forced`
/// plus a uniform subset of the complement.
fn superset_of<R: Rng + ?Sized>(forced: &[u64], n: usize, bits: usize, rng: &mut R) -> Set {
    let mut s: FxHashSet<u64> = forced.iter().copied().collect();
    let mut out = forced.to_vec();
    while out.len() < n {
        let x = rng.random_range(0..1u64 << bits);
        if s.insert(x) {
            out.push(x);
        }
    }
    sorted(out)
}

pub fn gen_base_sets<R: Rng + ?Sized>(c: &ComposedOracle, rng: &mut R) -> Result<BaseSets> {
    let n = check_shape(c)?;
    let d = c.d();
    let sigma = alphabet(c);
    let mut sigma_paths = vec![image(c, 0, &(0..sigma as u64).collect::<Vec<_>>())];
    for j in 1..d {
        let next = image(c, j, &sigma_paths[j - 1]);
        sigma_paths.push(next);
    }
    let mut base = vec![superset_of(&sigma_paths[0], n, c.mid_bits(), rng)];
    for j in 1..d {
        let next = image(c, j, &base[j - 1]);
        base.push(next);
    }
    let abort = if let Some(i) = base.iter().position(|s| s.len() != n) {
        Some(AbortReason::BaseShrank { stage: i })
    } else if sigma_paths[0].len() != sigma {
        Some(AbortReason::SigmaImageShrank)
    } else {
        None
    };
    Ok(BaseSets {
        d,
        sigma,
        sigma_paths,
        base,
        abort,
    })
}

/// `S_{ik}` for `0 ≤ i ≤ d`, `1 ≤ k ≤ d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetMatrix {
    pub d: usize,
    rows: Vec<Vec<Set>>,
}

impl SetMatrix {
    fn empty(base: &BaseSets) -> Self {
        SetMatrix {
            d: base.d,
            rows: vec![vec![Vec::new(); base.d]; base.d + 1],
        }
    }

    fn with_base(base: &BaseSets) -> Self {
        let mut m = Self::empty(base);
        m.rows[0] = base.base.clone();
        m
    }

    pub fn get(&self, i: usize, k: usize) -> &[u64] {
        &self.rows[i][k - 1]
    }

    /// `S̄_i = (S_{i1} … S_{id})`.
    pub fn row(&self, i: usize) -> &[Set] {
        &self.rows[i]
    }

    pub fn is_empty(&self) -> bool {
        self.rows[1..].iter().flatten().all(|s| s.is_empty())
    }

    fn propagate(&mut self, c: &ComposedOracle, i: usize) {
        for k in i + 1..=self.d {
            self.rows[i][k - 1] = image(c, k - 1, &self.rows[i][k - 2]);
        }
    }
}

fn diag_size(base: &BaseSets, prev: &[u64]) -> Result<usize> {
    if prev.len() % base.sigma != 0 {
        return Err(Error::param(format!(
            "|S_(i-1,i)| = {} is not a multiple of |Σ|",
            prev.len()
        )));
    }
    Ok(prev.len() / base.sigma)
}

pub fn gen_set_matrix<R: Rng + ?Sized>(base: &BaseSets, c: &ComposedOracle, rng: &mut R) -> Result<SetMatrix> {
    if base.d != c.d() {
        return Err(Error::param("base sets were built for a different d"));
    }
    if base.aborted() {
        return Ok(SetMatrix::empty(base));
    }
    let mut m = SetMatrix::with_base(base);
    for i in 1..=base.d {
        let prev = m.get(i - 1, i).to_vec();
        let size = diag_size(base, &prev)?;
        let forced: Set = base.s(i).iter().copied().filter(|&x| contains(&prev, x)).collect();
        if forced.len() > size {
            return Err(Error::param("forced points exceed the diagonal size"));
        }
        let rest: Vec<u64> = prev.iter().copied().filter(|&x| !contains(&forced, x)).collect();
        let pick = index::sample(rng, rest.len(), size - forced.len());
        let mut diag = forced;
        diag.extend(pick.iter().map(|j| rest[j]));
        m.rows[i][i - 1] = sorted(diag);
        m.propagate(c, i);
    }
    Ok(m)
}

/// Sets learned by classical path queries at one step: `T_0 ⊆ Σ`,
/// `T_1 ⊇ H_0(T_0)`, `T_j = H_{j-1}(T_{j-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathQueries {
    pub sets: Vec<Set>,
}

impl PathQueries {
    pub fn none(d: usize) -> Self {
        PathQueries {
            sets: vec![Vec::new(); d + 1],
        }
    }

    /// Paths through `t0 ⊆ Σ` and through the extra stage-1 points, followed
    /// to stage `d`.
    pub fn from_points(c: &ComposedOracle, t0: &[u64], extra: &[u64]) -> Result<Self> {
        let mut t1 = image(c, 0, t0);
        t1.extend_from_slice(extra);
        let mut sets = vec![sorted(t0.to_vec()), sorted(t1)];
        for j in 2..=c.d() {
            let next = image(c, j - 1, &sets[j - 1]);
            sets.push(next);
        }
        let q = PathQueries { sets };
        if let Some(s) = q.sets.iter().find(|s| s.len() > PATH_CAP) {
            return Err(Error::param(format!(
                "{} path queries exceed the cap {PATH_CAP}",
                s.len()
            )));
        }
        Ok(q)
    }

    pub fn is_path_queries(&self, c: &ComposedOracle) -> bool {
        self.sets.len() == c.d() + 1
            && is_subset(&image(c, 0, &self.sets[0]), &self.sets[1])
            && (2..=c.d()).all(|j| image(c, j - 1, &self.sets[j - 1]) == self.sets[j])
    }

    /// `T_j` for `0 ≤ j ≤ d`.
    pub fn t(&self, j: usize) -> &[u64] {
        &self.sets[j]
    }
}

/// Row `i` given the previous row and the path queries of step `i`:
/// `S_ii ⊆ S_{i-1,i} \ T_ii` with `(S_i ∩ S_{i-1,i}) \ T_ii ⊆ S_ii`.
pub fn gen_set_row_qc<R: Rng + ?Sized>(
    base: &BaseSets,
    c: &ComposedOracle,
    prev_row: &[Set],
    i: usize,
    t: &PathQueries,
    rng: &mut R,
) -> Result<Vec<Set>> {
    if !(1..=base.d).contains(&i) || prev_row.len() != base.d || t.sets.len() != base.d + 1 {
        return Err(Error::param("row index or set shapes do not match d"));
    }
    if t.sets.iter().any(|s| s.len() > PATH_CAP) {
        return Err(Error::param(format!("path queries exceed the cap {PATH_CAP}")));
    }
    let mut row = vec![Vec::new(); base.d];
    if base.aborted() {
        return Ok(row);
    }
    let prev = &prev_row[i - 1];
    let size = diag_size(base, prev)?;
    let excluded = t.t(i);
    let forced: Set = base
        .s(i)
        .iter()
        .copied()
        .filter(|&x| contains(prev, x) && !contains(excluded, x))
        .collect();
    let mut rest: Vec<u64> = prev
        .iter()
        .copied()
        .filter(|&x| !contains(excluded, x) && !contains(&forced, x))
        .collect();
    if forced.len() > size || forced.len() + rest.len() < size {
        return Err(Error::param("exclusions leave no valid diagonal set"));
    }
    rest.shuffle(rng);
    let mut diag = forced;
    diag.extend_from_slice(&rest[..size - diag.len()]);
    row[i - 1] = sorted(diag);
    for k in i + 1..=base.d {
        row[k - 1] = image(c, k - 1, &row[k - 2]);
    }
    Ok(row)
}

/// Rows `1 … d` built one step at a time, step `i` excluding `paths[i-1]`.
pub fn gen_set_matrix_qc<R: Rng + ?Sized>(
    base: &BaseSets,
    c: &ComposedOracle,
    paths: &[PathQueries],
    rng: &mut R,
) -> Result<SetMatrix> {
    if base.d != c.d() || paths.len() != base.d {
        return Err(Error::param("one path-query tuple per row is needed"));
    }
    if base.aborted() {
        return Ok(SetMatrix::empty(base));
    }
    let mut m = SetMatrix::with_base(base);
    for i in 1..=base.d {
        let row = gen_set_row_qc(base, c, &m.rows[i - 1], i, &paths[i - 1], rng)?;
        m.rows[i] = row;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{compose_recursive, RandomOracle};
    use crate::seed::Seed;

    pub(crate) fn oracle(seed: u64, sigma: usize, d: usize) -> ComposedOracle {
        compose_recursive(&RandomOracle::root(Seed::from_u64(seed), "shadowlab"), sigma, d, sigma).unwrap()
    }

    fn non_aborted(sigma: usize, d: usize) -> (ComposedOracle, BaseSets) {
        for s in 0.. {
            let c = oracle(s, sigma, d);
            let b = gen_base_sets(&c, &mut Seed::from_u64(s).rng()).unwrap();
            if !b.aborted() {
                return (c, b);
            }
        }
        unreachable!()
    }

    #[test]
    fn base_sets_have_exact_sizes() {
        let (c, b) = non_aborted(2, 2);
        let n = 4usize.pow(4);
        assert!(b.base.iter().all(|s| s.len() == n));
        assert!(b.sigma_paths.iter().all(|s| s.len() == 4));
        assert!(is_subset(b.s(1), b.s0(1)));
        assert_eq!(image(&c, 1, b.s0(1)), b.s0(2));
    }

    #[test]
    fn matrix_rows_shrink_and_contain_the_sigma_paths() {
        let (c, b) = non_aborted(2, 3);
        let m = gen_set_matrix(&b, &c, &mut Seed::from_u64(9).rng()).unwrap();
        for i in 1..=3 {
            for k in 1..=3 {
                if k < i {
                    assert!(m.get(i, k).is_empty());
                } else {
                    assert_eq!(m.get(i, k).len() * 4, m.get(i - 1, k).len());
                    assert!(is_subset(m.get(i, k), m.get(i - 1, k)));
                    assert!(is_subset(b.s(k), m.get(i, k)));
                }
            }
        }
    }

    #[test]
    fn exclusions_are_respected() {
        let (c, b) = non_aborted(2, 2);
        let mut rng = Seed::from_u64(3).rng();
        let extra: Vec<u64> = b.s0(1)[..6].to_vec();
        let t = PathQueries::from_points(&c, &[0, 1], &extra).unwrap();
        assert!(t.is_path_queries(&c));
        let m = gen_set_matrix_qc(&b, &c, &[t.clone(), PathQueries::none(2)], &mut rng).unwrap();
        assert!(t.t(1).iter().all(|&x| !contains(m.get(1, 1), x)));
        let forced: Vec<u64> = b.s(1).iter().copied().filter(|&x| !contains(t.t(1), x)).collect();
        assert!(is_subset(&forced, m.get(1, 1)));
        assert_eq!(m.get(1, 1).len() * 4, b.s0(1).len());
    }

    #[test]
    fn aborted_runs_give_empty_matrices() {
        let c = oracle(1, 2, 2);
        let mut b = gen_base_sets(&c, &mut Seed::from_u64(1).rng()).unwrap();
        b.abort = Some(AbortReason::SigmaImageShrank);
        assert!(gen_set_matrix(&b, &c, &mut Seed::from_u64(2).rng()).unwrap().is_empty());
    }

    #[test]
    fn oversized_parameters_are_refused() {
        let c = oracle(1, 4, 3);
        assert!(matches!(
            gen_base_sets(&c, &mut Seed::from_u64(1).rng()),
            Err(Error::Parameter(_))
        ));
        assert!(gen_base_sets(&oracle(1, 2, 0), &mut Seed::from_u64(1).rng()).is_err());
    }
}
