use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ComposedOracle;

use super::sets::{contains, Set, SetMatrix};

/// The blocked response; outside every stage's range.
pub const BOT: u64 = u64::MAX;

/// Answers `⊥` on `S_i` at stage `i` (`1 ≤ i ≤ d`) and like the underlying
/// oracle everywhere else. Stage 0 is never blocked.
#[derive(Debug, Clone)]
pub struct ShadowOracle {
    oracle: ComposedOracle,
    blocked: Vec<Set>,
}

pub fn make_shadow(c: &ComposedOracle, blocked: &[Set]) -> Result<ShadowOracle> {
    if blocked.len() != c.d() {
        return Err(Error::param(format!(
            "expected {} blocked sets, got {}",
            c.d(),
            blocked.len()
        )));
    }
    let top = 1u64 << c.mid_bits();
    if blocked.iter().flatten().any(|&x| x >= top) {
        return Err(Error::param("blocked point outside the stage domain"));
    }
    let blocked = blocked
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    Ok(ShadowOracle {
        oracle: c.clone(),
        blocked,
    })
}

impl ShadowOracle {
    pub fn oracle(&self) -> &ComposedOracle {
        &self.oracle
    }

    pub fn is_blocked(&self, stage: usize, x: u64) -> bool {
        stage >= 1 && contains(&self.blocked[stage - 1], x)
    }

    /// Stage `stage` on `x`, or [`BOT`].
    pub fn query(&self, stage: usize, x: u64) -> u64 {
        if self.is_blocked(stage, x) {
            BOT
        } else {
            self.oracle.stage(stage).eval_u64(x)
        }
    }
}

/// Outcome of tracing every `Σ`-path through `d` rounds of shadow oracles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathTrace {
    /// Deepest stage index whose values the rounds revealed on `Σ`-paths.
    pub deepest_level: usize,
    /// Non-`⊥` answers of the last stage on `Σ`-paths, over all rounds.
    pub final_values_seen: usize,
    /// Every answer on a `Σ`-path was `⊥` exactly when the stage was at or
    /// beyond the round index.
    pub blocking_as_expected: bool,
}

/// A depth-`d` parallel-query run wired to the shadows of rows `1 … d`.
///
/// In round `r` the shadow of `S̄_r` answers every stage on every point of
/// the propagated `Σ`-paths (`Σ`, `S_1`, …, `S_d`), whether or not the run has
/// learned that point yet. Points learned in round `r` become usable in round
/// `r + 1`.
pub fn trace_qnc(c: &ComposedOracle, sigma_paths: &[Set], matrix: &SetMatrix) -> Result<PathTrace> {
    let d = c.d();
    if sigma_paths.len() != d || matrix.d != d {
        return Err(Error::param("set shapes do not match d"));
    }
    let sigma: Set = (0..1u64 << c.sigma_bits()).collect();
    let level = |j: usize| if j == 0 { &sigma } else { &sigma_paths[j - 1] };
    let mut deepest = 0;
    let mut final_seen = 0;
    let mut expected = true;
    for r in 1..=d {
        let shadow = make_shadow(c, matrix.row(r))?;
        let mut reached = deepest;
        for j in 0..=d {
            for &x in level(j) {
                let v = shadow.query(j, x);
                let blocked = v == BOT;
                expected &= blocked == (j >= r);
                if !blocked && j == d {
                    final_seen += 1;
                }
                if !blocked && j == deepest {
                    reached = reached.max(j + 1);
                }
            }
        }
        deepest = reached;
    }
    Ok(PathTrace {
        deepest_level: deepest,
        final_values_seen: final_seen,
        blocking_as_expected: expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{compose_recursive, RandomOracle};
    use crate::seed::Seed;
    use crate::shadowlab::sets::{gen_base_sets, gen_set_matrix};

    #[test]
    fn shadow_blocks_exactly_the_sets() {
        let c = compose_recursive(&RandomOracle::root(Seed::from_u64(1), "s"), 2, 2, 2).unwrap();
        let sh = make_shadow(&c, &[vec![5, 9], vec![7]]).unwrap();
        assert_eq!(sh.query(1, 5), BOT);
        assert_eq!(sh.query(2, 7), BOT);
        assert_eq!(sh.query(1, 7), c.stage(1).eval_u64(7));
        assert_eq!(sh.query(0, 1), c.stage(0).eval_u64(1));
        assert!(make_shadow(&c, &[vec![1 << 40], vec![]]).is_err());
    }

    #[test]
    fn depth_d_run_never_sees_the_composed_values() {
        for d in 1..=3 {
            for s in 0..6 {
                let c = compose_recursive(&RandomOracle::root(Seed::from_u64(s), "s"), 2, d, 2).unwrap();
                let b = gen_base_sets(&c, &mut Seed::from_u64(s).rng()).unwrap();
                if b.aborted() {
                    continue;
                }
                let m = gen_set_matrix(&b, &c, &mut Seed::from_u64(s + 100).rng()).unwrap();
                let t = trace_qnc(&c, &b.sigma_paths, &m).unwrap();
                assert!(t.blocking_as_expected);
                assert_eq!(t.final_values_seen, 0);
                assert_eq!(t.deepest_level, d);
            }
        }
    }
}
