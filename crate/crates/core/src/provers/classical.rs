//! Classical baselines for CollisionHashing.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::Result;
use crate::hybrid::ClassicalOracles;
use crate::oracle::QueryLog;
use crate::problems::collision::G;
use crate::problems::{CollisionInstance, CollisionSolution, CollisionTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AdversaryKind {
    RandomGuess,
    /// `budget` classical queries to `g` at uniform points, then guesses.
    QueryStrategy {
        budget: usize,
    },
}

impl AdversaryKind {
    fn budget(self) -> usize {
        match self {
            AdversaryKind::RandomGuess => 0,
            AdversaryKind::QueryStrategy { budget } => budget,
        }
    }
}

/// Outputs the images it saw collide, padded with fresh random images;
/// `m` and `r` are uniform. With no budget this is a uniform guess.
pub fn classical_adversary<R: Rng + ?Sized>(
    kind: AdversaryKind,
    inst: &CollisionInstance,
    rng: &mut R,
) -> Result<(CollisionSolution, QueryLog)> {
    let l = inst.lambda();
    let set = inst.oracles();
    let mut log = QueryLog::new();
    let budget = kind.budget();
    let mut seen: HashMap<BitString, BitString> = HashMap::new();
    let mut found = Vec::new();
    {
        let mut handle = ClassicalOracles::new(&set, &mut log, Some(budget));
        for _ in 0..budget {
            let x = BitString::random(l + 1, rng);
            let y = handle.query(G, &x)?;
            match seen.get(&y) {
                Some(prev) if *prev != x && !found.contains(&y) => found.push(y),
                Some(_) => {}
                None => {
                    seen.insert(y, x);
                }
            }
        }
    }
    found.truncate(l);
    let mut used: HashSet<BitString> = found.iter().cloned().collect();
    while found.len() < l {
        let y = BitString::random(l, rng);
        if used.insert(y.clone()) {
            found.push(y);
        }
    }
    let triples = found
        .into_iter()
        .map(|y| CollisionTriple {
            y,
            m: rng.random(),
            r: BitString::random(l + 1, rng),
        })
        .collect();
    Ok((CollisionSolution { triples }, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::collision::claw_parity;
    use crate::problems::ENUM_CAP;
    use crate::seed::Seed;

    fn inst() -> CollisionInstance {
        CollisionInstance::new(Seed::from_u64(1), 8, &BitString::empty()).unwrap()
    }

    #[test]
    fn zero_budget_is_random_guess() {
        let i = inst();
        let a = classical_adversary(AdversaryKind::RandomGuess, &i, &mut Seed::from_u64(2).rng()).unwrap();
        let b = classical_adversary(
            AdversaryKind::QueryStrategy { budget: 0 },
            &i,
            &mut Seed::from_u64(2).rng(),
        )
        .unwrap();
        assert_eq!(a.0, b.0);
        assert!(a.1.is_empty());
    }

    #[test]
    fn query_strategy_respects_its_budget_and_finds_collisions() {
        let i = inst();
        let (sol, log) = classical_adversary(
            AdversaryKind::QueryStrategy { budget: 400 },
            &i,
            &mut Seed::from_u64(3).rng(),
        )
        .unwrap();
        assert_eq!(log.len(), 400);
        let pre = i.g_table().unwrap().preimages(ENUM_CAP).unwrap();
        let multi = sol
            .triples
            .iter()
            .filter(|t| pre[t.y.to_u64() as usize].len() >= 2)
            .count();
        assert!(multi >= 6, "{multi}");
    }

    #[test]
    fn guessed_bits_are_valid_half_the_time() {
        let i = inst();
        let pre = i.g_table().unwrap().preimages(ENUM_CAP).unwrap();
        let mut rng = Seed::from_u64(4).rng();
        let (mut idx, mut valid) = (0u64, 0u64);
        for _ in 0..300 {
            let (sol, _) = classical_adversary(AdversaryKind::QueryStrategy { budget: 300 }, &i, &mut rng).unwrap();
            for t in &sol.triples {
                let p = &pre[t.y.to_u64() as usize];
                if p.len() == 2 {
                    idx += 1;
                    let (a, b) = (BitString::from_u64(p[0], 9), BitString::from_u64(p[1], 9));
                    if t.m == claw_parity(i.equation(), &a, &b, &t.r).unwrap() {
                        valid += 1;
                    }
                }
            }
        }
        let rate = valid as f64 / idx as f64;
        assert!(
            (rate - 0.5).abs() < 3.0 * crate::stats::sigma(0.5, idx),
            "{rate} over {idx}"
        );
    }
}
