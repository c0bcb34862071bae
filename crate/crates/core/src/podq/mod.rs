//! The two-message proof of quantum depth: the verifier sends `pk`, the
//! prover answers with `π`, and the verdict is a classical function of
//! `(config, pk, π)` with oracle access.

mod experiment;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hybrid::Model;
use crate::oracle::{QueryLog, HASH_NAME};
use crate::problems::collision::verify_with_table;
use crate::problems::{
    brute_force_code, verify_code_hashing, CodeHashingInstance, CodeSolution, CollisionInstance, CollisionSolution,
    ProblemKind, RepetitionCode, Verdict, ENUM_CAP,
};
use crate::provers::{honest_collision_prover, ProverBackend};
use crate::seed::Seed;

pub use experiment::{
    cqc_coherent_attempt, experiment, ExperimentConfig, ExperimentReport, ProverKind, ProverReport, Thresholds,
    EVIDENCE_NOTE,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Length of the toy repetition code used by the CodeHashing path.
pub const CODE_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    Keyless,
    Salted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keys {
    pub sk: BitString,
    pub pk: BitString,
}

pub fn gen<R: Rng + ?Sized>(lambda: usize, mode: KeyMode, rng: &mut R) -> Result<Keys> {
    if lambda < 4 {
        return Err(Error::param(format!("lambda must be at least 4, got {lambda}")));
    }
    let pk = match mode {
        KeyMode::Keyless => BitString::empty(),
        KeyMode::Salted => BitString::random(lambda, rng),
    };
    Ok(Keys {
        sk: BitString::empty(),
        pk,
    })
}

/// The public parameters both parties agree on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptConfig {
    pub lambda: usize,
    pub d: usize,
    pub problem: ProblemKind,
    pub hash_name: String,
    pub seed_hex: String,
}

impl TranscriptConfig {
    pub fn new(lambda: usize, d: usize, problem: ProblemKind, seed: Seed) -> Result<Self> {
        let cfg = TranscriptConfig {
            lambda,
            d,
            problem,
            hash_name: HASH_NAME.to_string(),
            seed_hex: seed.to_hex(),
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn seed(&self) -> Result<Seed> {
        Seed::from_hex(&self.seed_hex)
    }

    fn check(&self) -> Result<()> {
        if !matches!(self.problem, ProblemKind::CollisionHashing | ProblemKind::CodeHashing) {
            return Err(Error::param(format!(
                "{:?} is not a protocol instantiation",
                self.problem
            )));
        }
        if self.hash_name != HASH_NAME {
            return Err(Error::param(format!("unsupported hash `{}`", self.hash_name)));
        }
        if self.lambda < 4 || self.lambda > ENUM_CAP {
            return Err(Error::param(format!(
                "lambda must lie in 4..={ENUM_CAP}, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// d-CollisionHashing keyed by `pk`.
    pub fn collision_instance(&self, pk: &BitString) -> Result<CollisionInstance> {
        CollisionInstance::new(self.seed()?, self.lambda, pk)?.lift_recursive(self.d)
    }

    /// d-CodeHashing over a length-4 repetition code with `λ`-bit symbols.
    pub fn code_instance(&self, pk: &BitString) -> Result<CodeHashingInstance> {
        let code = RepetitionCode {
            n: CODE_LEN,
            symbol_bits: self.lambda,
        };
        CodeHashingInstance::new(self.seed()?, Box::new(code), pk).lift_recursive(self.d)
    }
}

/// The prover's message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "problem")]
pub enum Proof {
    CollisionHashing(CollisionSolution),
    CodeHashing(CodeSolution),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthLedger {
    pub prover_model: Option<Model>,
    pub prover_quantum_depth: usize,
    pub verifier_quantum_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub prover_classical: usize,
    pub verifier_classical: usize,
}

#[derive(Debug, Clone)]
pub struct ProverOutput {
    pub proof: Proof,
    pub depth: DepthLedger,
    pub classical_queries: usize,
}

/// Honest prover against the `pk`-salted oracle: the quantum collision
/// prover, or brute force for the toy code.
pub fn prove<R: Rng + ?Sized>(
    pk: &BitString,
    cfg: &TranscriptConfig,
    backend: ProverBackend,
    rng: &mut R,
) -> Result<ProverOutput> {
    cfg.check()?;
    match cfg.problem {
        ProblemKind::CollisionHashing => {
            let inst = cfg.collision_instance(pk)?;
            let run = honest_collision_prover(&inst, backend, rng)?;
            let queries = run.trace.as_ref().map_or(0, |t| t.queries.len());
            Ok(ProverOutput {
                proof: Proof::CollisionHashing(run.solution),
                depth: DepthLedger {
                    prover_model: Some(Model::Qnc),
                    prover_quantum_depth: run.depth,
                    verifier_quantum_depth: 0,
                },
                classical_queries: queries,
            })
        }
        _ => {
            let inst = cfg.code_instance(pk)?;
            // an unsatisfiable draw still gets a well-formed (rejected) answer
            let sol = brute_force_code(&inst, ENUM_CAP)?.unwrap_or_else(|| CodeSolution {
                word: vec![BitString::zeros(cfg.lambda); CODE_LEN],
            });
            Ok(ProverOutput {
                proof: Proof::CodeHashing(sol),
                depth: DepthLedger {
                    prover_model: None,
                    prover_quantum_depth: 0,
                    verifier_quantum_depth: 0,
                },
                classical_queries: CODE_LEN << cfg.lambda,
            })
        }
    }
}

/// The verdict and the verifier's classical query count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierRecord {
    pub verdict: Verdict,
    pub queries: usize,
}

/// Classical verification. `sk` is unused by both instantiations.
pub fn verify(_keys: &Keys, pk: &BitString, proof: &Proof, cfg: &TranscriptConfig) -> Result<VerifierRecord> {
    cfg.check()?;
    match (cfg.problem, proof) {
        (ProblemKind::CollisionHashing, Proof::CollisionHashing(sol)) => {
            let inst = cfg.collision_instance(pk)?;
            let table = inst.g_table()?;
            let mut log = QueryLog::new();
            let verdict = verify_with_table(&inst, &table, sol, &mut log)?;
            Ok(VerifierRecord {
                verdict,
                queries: (1 << (cfg.lambda + 1)) + log.len(),
            })
        }
        (ProblemKind::CodeHashing, Proof::CodeHashing(sol)) => {
            let inst = cfg.code_instance(pk)?;
            let verdict = verify_code_hashing(&inst, sol)?;
            Ok(VerifierRecord {
                verdict,
                queries: sol.word.len(),
            })
        }
        _ => Err(Error::MalformedProof(format!(
            "proof does not match problem {:?}",
            cfg.problem
        ))),
    }
}

/// Who sent a protocol message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Verifier,
    Prover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: Party,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub config: TranscriptConfig,
    pub pk_hex: String,
    pub proof: Proof,
    pub verdict: Verdict,
    pub depth: DepthLedger,
    pub queries: QueryCounts,
}

impl Transcript {
    pub fn pk(&self) -> Result<BitString> {
        if self.pk_hex.is_empty() {
            Ok(BitString::empty())
        } else {
            BitString::from_hex(&self.pk_hex, self.config.lambda)
        }
    }

    /// The protocol messages in order: `pk`, then `π`.
    pub fn messages(&self) -> Vec<Message> {
        vec![
            Message {
                from: Party::Verifier,
                body: self.pk_hex.clone(),
            },
            Message {
                from: Party::Prover,
                body: serde_json::to_string(&self.proof).expect("proof serializes"),
            },
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Transcript = serde_json::from_str(s).map_err(|e| Error::Decode(e.to_string()))?;
        if t.schema_version != SCHEMA_VERSION {
            return Err(Error::Decode(format!(
                "unsupported schema version {}",
                t.schema_version
            )));
        }
        Ok(t)
    }
}

/// Re-runs the verifier on a stored transcript.
pub fn replay(t: &Transcript) -> Result<Verdict> {
    let pk = t.pk()?;
    let keys = Keys {
        sk: BitString::empty(),
        pk: pk.clone(),
    };
    Ok(verify(&keys, &pk, &t.proof, &t.config)?.verdict)
}

/// One full run: gen, prove, verify.
pub fn run_protocol<R: Rng + ?Sized>(
    cfg: &TranscriptConfig,
    mode: KeyMode,
    backend: ProverBackend,
    rng: &mut R,
) -> Result<Transcript> {
    let keys = gen(cfg.lambda, mode, rng)?;
    let out = prove(&keys.pk, cfg, backend, rng)?;
    let rec = verify(&keys, &keys.pk, &out.proof, cfg)?;
    Ok(Transcript {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        pk_hex: if keys.pk.is_empty() {
            String::new()
        } else {
            keys.pk.to_hex()
        },
        proof: out.proof,
        verdict: rec.verdict,
        depth: out.depth,
        queries: QueryCounts {
            prover_classical: out.classical_queries,
            verifier_classical: rec.queries,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::collision::brute_force_collision;

    fn cfg(lambda: usize, d: usize) -> TranscriptConfig {
        TranscriptConfig::new(lambda, d, ProblemKind::CollisionHashing, Seed::from_u64(7)).unwrap()
    }

    #[test]
    fn key_shapes() {
        let mut rng = Seed::from_u64(1).rng();
        assert_eq!(
            gen(8, KeyMode::Keyless, &mut rng).unwrap(),
            Keys {
                sk: BitString::empty(),
                pk: BitString::empty()
            }
        );
        let k = gen(16, KeyMode::Salted, &mut rng).unwrap();
        assert_eq!(k.pk.len(), 16);
        assert!(k.sk.is_empty());
        let other = gen(16, KeyMode::Salted, &mut Seed::from_u64(2).rng()).unwrap();
        assert_ne!(k.pk, other.pk);
        assert!(gen(3, KeyMode::Salted, &mut rng).is_err());
    }

    #[test]
    fn transcripts_have_two_messages_and_replay() {
        let mut rng = Seed::from_u64(3).rng();
        for mode in [KeyMode::Keyless, KeyMode::Salted] {
            let t = run_protocol(&cfg(8, 1), mode, ProverBackend::StructuredBranch, &mut rng).unwrap();
            let m = t.messages();
            assert_eq!(m.len(), 2);
            assert_eq!((m[0].from, m[1].from), (Party::Verifier, Party::Prover));
            assert_eq!(t.depth.verifier_quantum_depth, 0);
            assert_eq!(t.depth.prover_quantum_depth, 6);
            let back = Transcript::from_json(&t.to_json()).unwrap();
            assert_eq!(back, t);
            for _ in 0..10 {
                assert_eq!(replay(&back).unwrap(), t.verdict);
            }
        }
    }

    #[test]
    fn pk_tamper_rejects_like_a_random_guess() {
        use crate::problems::constants::{c_for_lambda, random_guess_bound, rational_to_f64};
        let c = cfg(10, 1);
        let mut rng = Seed::from_u64(4).rng();
        let (mut rejected, mut total) = (0u64, 0u64);
        while total < 200 {
            let t = run_protocol(&c, KeyMode::Salted, ProverBackend::StructuredBranch, &mut rng).unwrap();
            if !t.verdict.is_accept() {
                continue;
            }
            let mut forged = t.clone();
            let mut pk = t.pk().unwrap();
            pk.set(0, !pk.get(0));
            forged.pk_hex = pk.to_hex();
            total += 1;
            rejected += !replay(&forged).unwrap().is_accept() as u64;
        }
        let rg = random_guess_bound(10, rational_to_f64(&c_for_lambda(10).unwrap()).unwrap());
        let rate = rejected as f64 / total as f64;
        assert!(
            rate >= 1.0 - rg - 3.0 * crate::stats::sigma(rg, total),
            "{rate} vs {rg}"
        );
    }

    #[test]
    fn mismatched_proof_is_malformed() {
        let c = cfg(6, 0);
        let keys = Keys {
            sk: BitString::empty(),
            pk: BitString::empty(),
        };
        let p = Proof::CodeHashing(CodeSolution { word: vec![] });
        assert!(matches!(verify(&keys, &keys.pk, &p, &c), Err(Error::MalformedProof(_))));
    }

    #[test]
    fn brute_force_collision_proof_verifies_under_salt() {
        let c = cfg(6, 2);
        let pk = BitString::from_u64(0b101101, 6);
        let inst = c.collision_instance(&pk).unwrap();
        if let Some(sol) = brute_force_collision(&inst).unwrap() {
            let keys = Keys {
                sk: BitString::empty(),
                pk: pk.clone(),
            };
            let rec = verify(&keys, &pk, &Proof::CollisionHashing(sol), &c).unwrap();
            assert!(rec.verdict.is_accept());
            assert!(rec.queries >= 128);
        }
    }

    #[test]
    fn code_path_accepts_brute_force_proofs() {
        let mut accepted = 0;
        for s in 0..40 {
            let c = TranscriptConfig::new(4, 1, ProblemKind::CodeHashing, Seed::from_u64(s)).unwrap();
            let t = run_protocol(
                &c,
                KeyMode::Salted,
                ProverBackend::StructuredBranch,
                &mut Seed::from_u64(s).rng(),
            )
            .unwrap();
            let Proof::CodeHashing(sol) = &t.proof else { panic!() };
            let inst = c.code_instance(&t.pk().unwrap()).unwrap();
            assert_eq!(
                brute_force_code(&inst, ENUM_CAP).unwrap().is_some(),
                t.verdict.is_accept()
            );
            assert_eq!(t.verdict, verify_code_hashing(&inst, sol).unwrap());
            accepted += t.verdict.is_accept() as usize;
        }
        assert!(accepted > 10);
    }
}
