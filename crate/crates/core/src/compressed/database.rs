use serde::{Deserialize, Serialize};

/// Queried points and their values, sorted by input.
///
/// The padded register layout (pairs in input order, then `(⊥, 0)` up to the
/// capacity) is canonical, so only the defined pairs are stored; see
/// [`Database::slots`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Database {
    pairs: Vec<(u64, u64)>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(mut pairs: Vec<(u64, u64)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup_by_key(|p| p.0);
        Database { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    fn position(&self, x: u64) -> std::result::Result<usize, usize> {
        self.pairs.binary_search_by_key(&x, |p| p.0)
    }

    pub fn get(&self, x: u64) -> Option<u64> {
        self.position(x).ok().map(|i| self.pairs[i].1)
    }

    pub fn contains(&self, x: u64) -> bool {
        self.position(x).is_ok()
    }

    /// `D ∪ (x, w)`; `x` must be undefined in `D`.
    pub fn with(&self, x: u64, w: u64) -> Self {
        let mut pairs = self.pairs.clone();
        match self.position(x) {
            Ok(_) => panic!("input {x} already in the database"),
            Err(i) => pairs.insert(i, (x, w)),
        }
        Database { pairs }
    }

    pub fn without(&self, x: u64) -> Self {
        let mut pairs = self.pairs.clone();
        if let Ok(i) = self.position(x) {
            pairs.remove(i);
        }
        Database { pairs }
    }

    /// The padded register contents: pairs in input order, then `(⊥, 0)` up to
    /// `capacity`, with `⊥` encoded as `2^n`.
    pub fn slots(&self, capacity: usize, n: usize) -> Vec<(u64, u64)> {
        let bot = 1u64 << n;
        let mut s = self.pairs.clone();
        s.resize(capacity.max(s.len()), (bot, 0));
        s
    }

    /// Inputs strictly increasing, all inside the domain, values inside the range.
    pub fn is_well_formed(&self, n: usize, m: usize) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0) && self.pairs.iter().all(|&(x, w)| x < (1 << n) && w < (1 << m))
    }
}

/// Every database over `n`-bit inputs and `m`-bit values with at most `t`
/// pairs, in a fixed order.
pub fn all_databases(n: usize, m: usize, t: usize) -> Vec<Database> {
    fn rec(n: usize, m: usize, t: usize, from: u64, cur: &mut Vec<(u64, u64)>, out: &mut Vec<Database>) {
        out.push(Database { pairs: cur.clone() });
        if cur.len() == t {
            return;
        }
        for x in from..1 << n {
            for w in 0..1u64 << m {
                cur.push((x, w));
                rec(n, m, t, x + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, m, t, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_keeps_order() {
        let d = Database::new().with(5, 1).with(2, 0).with(9, 1);
        assert_eq!(d.pairs(), &[(2, 0), (5, 1), (9, 1)]);
        assert!(d.is_well_formed(4, 1));
        assert_eq!(d.without(5).pairs(), &[(2, 0), (9, 1)]);
        assert_eq!(d.get(9), Some(1));
        assert_eq!(d.get(3), None);
        assert_eq!(d.slots(5, 4), vec![(2, 0), (5, 1), (9, 1), (16, 0), (16, 0)]);
    }

    #[test]
    fn enumeration_counts() {
        // Σ_{l ≤ t} C(2^n, l)·2^{ml}
        assert_eq!(all_databases(2, 1, 2).len(), 1 + 4 * 2 + 6 * 4);
        assert_eq!(all_databases(4, 1, 2).len(), 1 + 16 * 2 + 120 * 4);
        assert!(all_databases(3, 1, 3).iter().all(|d| d.is_well_formed(3, 1)));
    }

    proptest::proptest! {
        #[test]
        fn edits_keep_the_ordering(ops in proptest::collection::vec((0u64..16, 0u64..2, proptest::bool::ANY), 0..40)) {
            let mut d = Database::new();
            for (x, w, insert) in ops {
                d = if insert && !d.contains(x) { d.with(x, w) } else { d.without(x) };
                proptest::prop_assert!(d.is_well_formed(4, 1));
            }
        }
    }
}
