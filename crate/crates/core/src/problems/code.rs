//! CodeHashing over a toy code: find a codeword whose `i`-th symbol hashes to
//! a value with bit `i` set, for every `i`.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::{compose_recursive, derive_suboracle, salt, ComposedOracle, RandomOracle};
use crate::seed::Seed;

use super::verdict::{RejectReason, Verdict};
use super::{Descriptor, ProblemKind};

/// Codes over `Σ = {0,1}^{symbol_bits}` of length `len`.
pub trait Code: Send + Sync {
    fn len(&self) -> usize;
    fn symbol_bits(&self) -> usize;
    fn is_codeword(&self, word: &[BitString]) -> bool;
    /// Every codeword; only meaningful for tiny codes.
    fn codewords(&self) -> Vec<Vec<BitString>>;
}

/// `{(a, a, …, a) : a ∈ Σ}`.
#[derive(Debug, Clone, Copy)]
pub struct RepetitionCode {
    pub n: usize,
    pub symbol_bits: usize,
}

impl RepetitionCode {
    pub fn toy() -> Self {
        RepetitionCode { n: 4, symbol_bits: 4 }
    }
}

impl Code for RepetitionCode {
    fn len(&self) -> usize {
        self.n
    }

    fn symbol_bits(&self) -> usize {
        self.symbol_bits
    }

    fn is_codeword(&self, word: &[BitString]) -> bool {
        word.len() == self.n
            && word.iter().all(|s| s.len() == self.symbol_bits)
            && word.windows(2).all(|w| w[0] == w[1])
    }

    fn codewords(&self) -> Vec<Vec<BitString>> {
        (0..1u64 << self.symbol_bits)
            .map(|a| vec![BitString::from_u64(a, self.symbol_bits); self.n])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum CodeOracle {
    Direct(RandomOracle),
    Lifted(ComposedOracle),
}

impl CodeOracle {
    fn eval(&self, x: &BitString) -> Result<BitString> {
        match self {
            CodeOracle::Direct(o) => o.eval(x),
            CodeOracle::Lifted(c) => c.eval(x),
        }
    }
}

pub struct CodeHashingInstance {
    code: Box<dyn Code>,
    seed: Seed,
    pk: BitString,
    root: RandomOracle,
    oracle: CodeOracle,
}

impl CodeHashingInstance {
    /// `H: Σ -> {0,1}^n`, salted with `pk` when it is non-empty.
    pub fn new(seed: Seed, code: Box<dyn Code>, pk: &BitString) -> Self {
        let mut root = RandomOracle::root(seed, "code-hashing");
        if !pk.is_empty() {
            root = salt(&root, pk);
        }
        let h = derive_suboracle(&root, b"H", code.symbol_bits(), code.len());
        CodeHashingInstance {
            code,
            seed,
            pk: pk.clone(),
            root,
            oracle: CodeOracle::Direct(h),
        }
    }

    pub fn toy(seed: Seed, pk: &BitString) -> Self {
        Self::new(seed, Box::new(RepetitionCode::toy()), pk)
    }

    /// d-CodeHashing: `H` replaced by the composed chain over `Σ`.
    pub fn lift_recursive(self, d: usize) -> Result<Self> {
        let c = compose_recursive(&self.root, self.code.symbol_bits(), d, self.code.len())?;
        Ok(CodeHashingInstance {
            oracle: CodeOracle::Lifted(c),
            ..self
        })
    }

    pub fn code(&self) -> &dyn Code {
        self.code.as_ref()
    }

    pub fn lift_depth(&self) -> Option<usize> {
        match &self.oracle {
            CodeOracle::Direct(_) => None,
            CodeOracle::Lifted(c) => Some(c.d()),
        }
    }

    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            problem: ProblemKind::CodeHashing,
            lambda: self.code.symbol_bits(),
            d: self.lift_depth(),
            seed: self.seed,
            pk: self.pk.clone(),
        }
    }

    pub fn hash(&self, symbol: &BitString) -> Result<BitString> {
        self.oracle.eval(symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSolution {
    pub word: Vec<BitString>,
}

pub fn verify_code_hashing(inst: &CodeHashingInstance, sol: &CodeSolution) -> Result<Verdict> {
    if !inst.code.is_codeword(&sol.word) {
        return Ok(Verdict::Reject(RejectReason::NotCodeword));
    }
    for (i, s) in sol.word.iter().enumerate() {
        if !inst.hash(s)?.get(i) {
            return Ok(Verdict::Reject(RejectReason::HashBit { index: i }));
        }
    }
    Ok(Verdict::Accept)
}

/// First accepting codeword in enumeration order; refuses codes with more than
/// `2^cap` codewords.
pub fn brute_force_code(inst: &CodeHashingInstance, cap: usize) -> Result<Option<CodeSolution>> {
    let k = inst.code.symbol_bits();
    if k > cap {
        return Err(Error::CapExceeded {
            what: "codeword enumeration bits",
            needed: k,
            cap,
        });
    }
    for word in inst.code.codewords() {
        let sol = CodeSolution { word };
        if verify_code_hashing(inst, &sol)?.is_accept() {
            return Ok(Some(sol));
        }
    }
    Ok(None)
}
