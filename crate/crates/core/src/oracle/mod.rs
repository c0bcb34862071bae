//! Seeded random oracles.
//!
//! Everything derives from one boolean root function `F: {0,1}* -> {0,1}`
//! keyed by `(seed, oracle_id)`. For inputs of at least 32 bits the last 32
//! bits are read as a block index `i`, and `F(w || <i>)` is bit `i mod 256` of
//! `SHA-256(tag || seed || id || |w| || w || i/256)`. Derived oracles put their
//! output index in exactly that position, so a derived oracle costs one hash
//! per 256 output bits.

mod composed;
mod log;

use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::seed::Seed;

pub use composed::{compose_recursive, ComposedOracle, Path, TabulatedComposed};
pub use log::{QueryLog, QueryRecord};

/// Name of the hash behind every oracle; recorded in reports.
pub const HASH_NAME: &str = "sha256";

/// Default largest input width `truth_table` will materialise.
pub const TABLE_CAP: usize = 20;

const DS_LONG: &[u8] = b"qdepth/ro/v1/long";
const DS_SHORT: &[u8] = b"qdepth/ro/v1/short";

struct OracleKey {
    seed: Seed,
    id: String,
    /// Hasher state after the long-input prefix, reused across evaluations.
    long_prefix: Sha256,
}

impl fmt::Debug for OracleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleKey")
            .field("seed", &self.seed)
            .field("id", &self.id)
            .finish()
    }
}

impl OracleKey {
    fn new(seed: Seed, id: &str) -> Self {
        let mut k = OracleKey {
            seed,
            id: id.to_string(),
            long_prefix: Sha256::new(),
        };
        k.long_prefix = k.hasher(DS_LONG);
        k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Layer {
    Salt(BitString),
    Derive(BitString),
}

/// A seeded, deterministic function on bit strings.
#[derive(Clone)]
pub struct RandomOracle {
    key: Arc<OracleKey>,
    /// Innermost first.
    layers: Arc<Vec<Layer>>,
    in_bits: Option<usize>,
    out_bits: usize,
    name: Arc<str>,
}

impl fmt::Debug for RandomOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RandomOracle({}: {:?} -> {})",
            self.name, self.in_bits, self.out_bits
        )
    }
}

impl RandomOracle {
    /// The boolean root oracle; accepts inputs of any length.
    pub fn root(seed: Seed, oracle_id: &str) -> Self {
        RandomOracle {
            key: Arc::new(OracleKey::new(seed, oracle_id)),
            layers: Arc::new(Vec::new()),
            in_bits: None,
            out_bits: 1,
            name: Arc::from(oracle_id),
        }
    }

    /// A fixed-width oracle: the root's sub-oracle under the empty tag.
    pub fn new(seed: Seed, oracle_id: &str, in_bits: usize, out_bits: usize) -> Self {
        let root = Self::root(seed, oracle_id);
        let mut o = derive_suboracle(&root, b"", in_bits, out_bits);
        o.name = Arc::from(oracle_id);
        o
    }

    pub fn seed(&self) -> Seed {
        self.key.seed
    }

    pub fn oracle_id(&self) -> &str {
        &self.key.id
    }

    /// `None` for width-free oracles (roots and their salts).
    pub fn in_bits(&self) -> Option<usize> {
        self.in_bits
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    /// Human-readable derivation path, used as the query-log label.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        if let Some(n) = self.in_bits {
            if x.len() != n {
                return Err(Error::WidthMismatch {
                    expected: n,
                    got: x.len(),
                });
            }
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation on a `u64`-encoded input; requires fixed widths of at most 64 bits.
    pub fn eval_u64(&self, x: u64) -> u64 {
        let n = self.in_bits.expect("eval_u64 needs a fixed input width");
        assert!(n <= 64 && self.out_bits <= 64);
        let x = BitString::from_u64(x, n);
        if self.derive_count() == 1 {
            let block = self.key.long_block(&self.shared_prefix(&x), 0);
            let head = u64::from_be_bytes(block[..8].try_into().expect("8 bytes"));
            return head >> (64 - self.out_bits);
        }
        self.eval_unchecked(&x).to_u64()
    }

    fn derive_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Derive(_))).count()
    }

    /// Root input queried for output bit `i`.
    fn unroll(&self, x: &BitString, i: usize) -> BitString {
        let mut z = x.clone();
        let mut idx = i as u32;
        for layer in self.layers.iter().rev() {
            match layer {
                Layer::Salt(pk) => z = pk.concat(&z),
                Layer::Derive(tag) => {
                    z.extend(tag);
                    z.extend(&BitString::from_u64(idx as u64, 32));
                    idx = 0;
                }
            }
        }
        z
    }

    /// [`Self::unroll`] without the trailing 32-bit index; only meaningful
    /// with a single derive layer.
    fn shared_prefix(&self, x: &BitString) -> BitString {
        let mut z = x.clone();
        for layer in self.layers.iter().rev() {
            match layer {
                Layer::Salt(pk) => z = pk.concat(&z),
                Layer::Derive(tag) => z.extend(tag),
            }
        }
        z
    }

    fn eval_unchecked(&self, x: &BitString) -> BitString {
        let mut out = BitString::zeros(self.out_bits);
        if self.derive_count() == 1 {
            // w is shared by every output bit; only the trailing index moves.
            let w = self.shared_prefix(x);
            let mut block = [0u8; 32];
            for i in 0..self.out_bits {
                if i % 256 == 0 {
                    block = self.key.long_block(&w, (i / 256) as u32);
                }
                out.set(i, bit_of(&block, i % 256));
            }
        } else {
            for i in 0..self.out_bits {
                out.set(i, self.key.root_bit(&self.unroll(x, i)));
            }
        }
        out
    }
}

impl OracleKey {
    fn root_bit(&self, z: &BitString) -> bool {
        if z.len() >= 32 {
            let i = z.slice(z.len() - 32, z.len()).to_u64() as u32;
            let w = z.slice(0, z.len() - 32);
            bit_of(&self.long_block(&w, i / 256), (i % 256) as usize)
        } else {
            let mut h = self.hasher(DS_SHORT);
            h.update((z.len() as u64).to_be_bytes());
            h.update(z.as_bytes());
            bit_of(&h.finalize().into(), 0)
        }
    }

    fn long_block(&self, w: &BitString, block: u32) -> [u8; 32] {
        let mut h = self.long_prefix.clone();
        h.update((w.len() as u64).to_be_bytes());
        h.update(w.as_bytes());
        h.update(block.to_be_bytes());
        h.finalize().into()
    }

    fn hasher(&self, ds: &[u8]) -> Sha256 {
        let mut h = Sha256::new();
        h.update(ds);
        h.update(self.seed.0);
        h.update((self.id.len() as u32).to_be_bytes());
        h.update(self.id.as_bytes());
        h
    }
}

#[inline]
fn bit_of(block: &[u8; 32], i: usize) -> bool {
    (block[i >> 3] >> (7 - (i & 7))) & 1 == 1
}

/// Domain splitting: bit `i` of the result on `x` is the parent's first output
/// bit on `x || tag || <i>`, with `<i>` a 32-bit big-endian index.
pub fn derive_suboracle(parent: &RandomOracle, tag: &[u8], in_bits: usize, out_bits: usize) -> RandomOracle {
    assert!(out_bits >= 1, "derived oracle needs at least one output bit");
    let mut layers = (*parent.layers).clone();
    layers.push(Layer::Derive(BitString::from_bytes(tag)));
    let tag_str = String::from_utf8_lossy(tag);
    RandomOracle {
        key: parent.key.clone(),
        layers: Arc::new(layers),
        in_bits: Some(in_bits),
        out_bits,
        name: Arc::from(format!("{}/{}", parent.name, tag_str)),
    }
}

/// The oracle `x -> parent(pk || x)`.
pub fn salt(oracle: &RandomOracle, pk: &BitString) -> RandomOracle {
    let mut layers = (*oracle.layers).clone();
    layers.push(Layer::Salt(pk.clone()));
    RandomOracle {
        key: oracle.key.clone(),
        layers: Arc::new(layers),
        in_bits: oracle.in_bits,
        out_bits: oracle.out_bits,
        name: Arc::from(format!("{}[pk={}]", oracle.name, pk.to_hex())),
    }
}

/// An explicit function table for inputs and outputs of at most 64 bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    in_bits: usize,
    out_bits: usize,
    values: Vec<u64>,
}

impl TruthTable {
    pub fn from_fn(in_bits: usize, out_bits: usize, f: impl Fn(u64) -> u64) -> Self {
        assert!(in_bits <= 40 && out_bits <= 64);
        TruthTable {
            in_bits,
            out_bits,
            values: (0..1u64 << in_bits).map(f).collect(),
        }
    }

    pub fn in_bits(&self) -> usize {
        self.in_bits
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    #[inline]
    pub fn get(&self, x: u64) -> u64 {
        self.values[x as usize]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Preimage lists indexed by output value; outputs must fit `cap` bits.
    pub fn preimages(&self, cap: usize) -> Result<Vec<Vec<u64>>> {
        if self.out_bits > cap {
            return Err(Error::CapExceeded {
                what: "preimage table output bits",
                needed: self.out_bits,
                cap,
            });
        }
        let mut pre = vec![Vec::new(); 1usize << self.out_bits];
        for (x, &y) in self.values.iter().enumerate() {
            pre[y as usize].push(x as u64);
        }
        Ok(pre)
    }
}

/// Materialises `oracle` over all inputs, refusing widths above `cap`.
pub fn truth_table(oracle: &RandomOracle, cap: usize) -> Result<TruthTable> {
    let n = oracle
        .in_bits
        .ok_or_else(|| Error::param("truth_table needs a fixed input width"))?;
    if n > cap {
        return Err(Error::CapExceeded {
            what: "truth table input bits",
            needed: n,
            cap,
        });
    }
    if oracle.out_bits > 64 {
        return Err(Error::CapExceeded {
            what: "truth table output bits",
            needed: oracle.out_bits,
            cap: 64,
        });
    }
    Ok(TruthTable::from_fn(n, oracle.out_bits, |x| oracle.eval_u64(x)))
}

/// A classical function a quantum oracle gate can wrap.
pub trait BitFunction: Send + Sync {
    fn in_bits(&self) -> usize;
    fn out_bits(&self) -> usize;
    fn apply(&self, x: &BitString) -> BitString;

    fn apply_u64(&self, x: u64) -> u64 {
        self.apply(&BitString::from_u64(x, self.in_bits())).to_u64()
    }
}

impl BitFunction for RandomOracle {
    fn in_bits(&self) -> usize {
        self.in_bits.expect("fixed-width oracle")
    }
    fn out_bits(&self) -> usize {
        self.out_bits
    }
    fn apply(&self, x: &BitString) -> BitString {
        self.eval_unchecked(x)
    }
}

impl BitFunction for TruthTable {
    fn in_bits(&self) -> usize {
        self.in_bits
    }
    fn out_bits(&self) -> usize {
        self.out_bits
    }
    fn apply(&self, x: &BitString) -> BitString {
        BitString::from_u64(self.get(x.to_u64()), self.out_bits)
    }
    fn apply_u64(&self, x: u64) -> u64 {
        self.get(x)
    }
}

/// A closure with declared widths.
pub struct FnFunction<F> {
    in_bits: usize,
    out_bits: usize,
    f: F,
}

impl<F: Fn(&BitString) -> BitString + Send + Sync> FnFunction<F> {
    pub fn new(in_bits: usize, out_bits: usize, f: F) -> Self {
        FnFunction { in_bits, out_bits, f }
    }
}

impl<F: Fn(&BitString) -> BitString + Send + Sync> BitFunction for FnFunction<F> {
    fn in_bits(&self) -> usize {
        self.in_bits
    }
    fn out_bits(&self) -> usize {
        self.out_bits
    }
    fn apply(&self, x: &BitString) -> BitString {
        (self.f)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use proptest::prelude::*;
    use rand::Rng;

    fn seed(n: u64) -> Seed {
        Seed::from_u64(n)
    }

    #[test]
    fn eval_is_deterministic() {
        let o = RandomOracle::new(seed(1), "t", 16, 24);
        let x = BitString::from_u64(0xbeef, 16);
        assert_eq!(o.eval(&x).unwrap(), o.eval(&x).unwrap());
        let o2 = RandomOracle::new(seed(1), "t", 16, 24);
        assert_eq!(o.eval(&x).unwrap(), o2.eval(&x).unwrap());
    }

    #[test]
    fn width_mismatch() {
        let o = RandomOracle::new(seed(1), "t", 5, 1);
        assert_eq!(
            o.eval(&BitString::zeros(4)),
            Err(Error::WidthMismatch { expected: 5, got: 4 })
        );
    }

    #[test]
    fn domain_splitting_two_bits() {
        let base = RandomOracle::root(seed(3), "base");
        let tag = b"t";
        let d = derive_suboracle(&base, tag, 6, 2);
        for xv in 0..64u64 {
            let x = BitString::from_u64(xv, 6);
            let tagbits = BitString::from_bytes(tag);
            let q0 = x.concat(&tagbits).concat(&BitString::from_u64(0, 32));
            let q1 = x.concat(&tagbits).concat(&BitString::from_u64(1, 32));
            let expected = BitString::from_bits(&[base.eval(&q0).unwrap().get(0), base.eval(&q1).unwrap().get(0)]);
            assert_eq!(d.eval(&x).unwrap(), expected);
        }
    }

    #[test]
    fn empty_tag_single_bit() {
        let base = RandomOracle::root(seed(4), "base");
        let d = derive_suboracle(&base, b"", 7, 1);
        for xv in 0..128u64 {
            let x = BitString::from_u64(xv, 7);
            let q = x.concat(&BitString::from_u64(0, 32));
            assert_eq!(d.eval(&x).unwrap().get(0), base.eval(&q).unwrap().get(0));
        }
    }

    #[test]
    fn derivation_is_exhaustively_consistent_up_to_eight_bits() {
        let base = RandomOracle::root(seed(5), "base");
        for in_bits in [1usize, 3, 8] {
            let d = derive_suboracle(&base, b"sub", in_bits, 9);
            let tagbits = BitString::from_bytes(b"sub");
            for xv in 0..(1u64 << in_bits) {
                let x = BitString::from_u64(xv, in_bits);
                let y = d.eval(&x).unwrap();
                for i in 0..9 {
                    let q = x.concat(&tagbits).concat(&BitString::from_u64(i, 32));
                    assert_eq!(y.get(i as usize), base.eval(&q).unwrap().get(0));
                }
            }
        }
    }

    #[test]
    fn nested_derivation_reads_parent_first_bit() {
        let base = RandomOracle::root(seed(6), "base");
        let mid = derive_suboracle(&base, b"m", 40, 3);
        let leaf = derive_suboracle(&mid, b"l", 4, 5);
        let tagbits = BitString::from_bytes(b"l");
        for xv in 0..16u64 {
            let x = BitString::from_u64(xv, 4);
            let y = leaf.eval(&x).unwrap();
            for i in 0..5 {
                let q = x.concat(&tagbits).concat(&BitString::from_u64(i, 32));
                assert_eq!(y.get(i as usize), mid.apply(&q).get(0));
            }
        }
    }

    #[test]
    fn wide_outputs_cross_hash_blocks() {
        let o = RandomOracle::new(seed(7), "wide", 8, 600);
        let base = RandomOracle::root(seed(7), "wide");
        let x = BitString::from_u64(0x5a, 8);
        let y = o.eval(&x).unwrap();
        for i in [0usize, 255, 256, 511, 512, 599] {
            let q = x.concat(&BitString::from_u64(i as u64, 32));
            assert_eq!(y.get(i), base.eval(&q).unwrap().get(0), "bit {i}");
        }
    }

    #[test]
    fn salting_composes_as_prefixes() {
        let base = RandomOracle::root(seed(8), "base");
        let a = BitString::from_u64(0b101, 3);
        let b = BitString::from_u64(0b0110, 4);
        let twice = salt(&salt(&base, &a), &b);
        let once = salt(&base, &a.concat(&b));
        for xv in 0..256u64 {
            let x = BitString::from_u64(xv, 8);
            assert_eq!(twice.eval(&x).unwrap(), once.eval(&x).unwrap());
            assert_eq!(once.eval(&x).unwrap(), base.eval(&a.concat(&b).concat(&x)).unwrap());
        }
    }

    #[test]
    fn salt_and_derive_commute() {
        let base = RandomOracle::root(seed(9), "base");
        let pk = BitString::from_u64(0x3c, 8);
        let inner = derive_suboracle(&salt(&base, &pk), b"g", 6, 6);
        let outer = salt(&derive_suboracle(&base, b"g", 6, 6), &pk);
        for xv in 0..64u64 {
            let x = BitString::from_u64(xv, 6);
            assert_eq!(inner.eval(&x).unwrap(), outer.eval(&x).unwrap());
        }
    }

    #[test]
    fn u64_path_matches_bit_strings() {
        let base = RandomOracle::root(seed(12), "base");
        let pk = BitString::from_u64(0x5, 3);
        for o in [
            derive_suboracle(&base, b"f", 7, 13),
            salt(&derive_suboracle(&base, b"f", 7, 64), &pk),
        ] {
            for xv in 0..128u64 {
                assert_eq!(o.eval_u64(xv), o.eval(&BitString::from_u64(xv, 7)).unwrap().to_u64());
            }
        }
    }

    #[test]
    fn same_pk_twice_is_identical() {
        let base = RandomOracle::new(seed(10), "base", 8, 8);
        let pk = BitString::from_u64(0xa5, 8);
        let s1 = salt(&base, &pk);
        let s2 = salt(&base, &pk);
        for xv in 0..256u64 {
            let x = BitString::from_u64(xv, 8);
            assert_eq!(s1.eval(&x).unwrap(), s2.eval(&x).unwrap());
        }
    }

    fn bit_series(o: &RandomOracle, n: usize, width: usize) -> Vec<f64> {
        (0..n as u64)
            .map(|x| o.eval(&BitString::from_u64(x, width)).unwrap().get(0) as u8 as f64)
            .collect()
    }

    #[test]
    fn distinct_ids_look_independent() {
        let a = RandomOracle::new(seed(11), "alpha", 16, 1);
        let b = RandomOracle::new(seed(11), "beta", 16, 1);
        let rho = stats::pearson(&bit_series(&a, 10_000, 16), &bit_series(&b, 10_000, 16));
        assert!(rho.abs() < 0.1, "rho = {rho}");
    }

    #[test]
    fn distinct_tags_look_independent() {
        let base = RandomOracle::root(seed(12), "base");
        let a = derive_suboracle(&base, b"a", 16, 1);
        let b = derive_suboracle(&base, b"b", 16, 1);
        let rho = stats::pearson(&bit_series(&a, 10_000, 16), &bit_series(&b, 10_000, 16));
        assert!(rho.abs() < 0.1, "rho = {rho}");
    }

    #[test]
    fn opposite_salts_look_independent() {
        let base = RandomOracle::new(seed(13), "base", 16, 1);
        let s0 = salt(&base, &BitString::zeros(12));
        let s1 = salt(&base, &BitString::ones(12));
        let rho = stats::pearson(&bit_series(&s0, 10_000, 16), &bit_series(&s1, 10_000, 16));
        assert!(rho.abs() < 0.1, "rho = {rho}");
    }

    #[test]
    fn outputs_pass_chi_square_uniformity() {
        let o = RandomOracle::new(seed(14), "chi", 16, 8);
        let mut counts = vec![0u64; 256];
        for x in 0..20_000u64 {
            counts[o.eval_u64(x) as usize] += 1;
        }
        let expected = vec![20_000.0 / 256.0; 256];
        let stat = stats::chi_square_statistic(&counts, &expected);
        assert!(stat < stats::chi_square_critical(255, 0.001), "chi2 = {stat}");
    }

    #[test]
    fn small_tables_are_rarely_extreme() {
        // exact: Pr[weight in [2,14]] = 1 - 2 * (C(16,0) + C(16,1)) / 2^16
        let exact = 1.0 - 2.0 * 17.0 / 65536.0;
        assert!(exact >= 0.99);
        let mut good = 0;
        for s in 0..500u64 {
            let o = RandomOracle::new(seed(1000 + s), "w", 4, 1);
            let w: u64 = (0..16).map(|x| o.eval_u64(x)).sum();
            if (2..=14).contains(&w) {
                good += 1;
            }
        }
        assert!(good >= 495, "{good}/500");
    }

    #[test]
    fn truth_table_matches_eval_and_caps() {
        let o = RandomOracle::new(seed(15), "tt", 2, 3);
        let t = truth_table(&o, TABLE_CAP).unwrap();
        assert_eq!(t.values().len(), 4);
        for x in 0..4 {
            assert_eq!(t.get(x), o.eval_u64(x));
        }
        assert_eq!(truth_table(&o, TABLE_CAP).unwrap(), t);
        let big = RandomOracle::new(seed(15), "big", 21, 1);
        assert!(matches!(truth_table(&big, 20), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn injectivity_frequency_respects_birthday_bound() {
        // f: B -> A with |B| = 8, |A| = 2^10 >= |B|^2.
        let trials = 10_000u64;
        let mut injective = 0u64;
        let mut rng = seed(16).rng();
        for _ in 0..trials {
            let mut seen = std::collections::HashSet::new();
            let ok = (0..8).all(|_| seen.insert(rng.random_range(0..1024u32)));
            injective += ok as u64;
        }
        let bound = 1.0 - 64.0 / 1024.0;
        let rate = injective as f64 / trials as f64;
        assert!(rate >= bound - 3.0 * stats::sigma(bound, trials), "{rate} vs {bound}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn repeated_eval_agrees(s in any::<u64>(), xv in any::<u32>(), out in 1usize..300) {
            let o = RandomOracle::new(Seed::from_u64(s), "p", 32, out);
            let x = BitString::from_u64(xv as u64, 32);
            prop_assert_eq!(o.eval(&x).unwrap(), o.eval(&x).unwrap());
            prop_assert_eq!(o.eval(&x).unwrap().len(), out);
        }
    }
}
