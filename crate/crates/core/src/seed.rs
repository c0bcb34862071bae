//! 128-bit seeds and the hierarchical seed tree.
//!
//! One experiment seed governs every trial: `seed.child("trial", t).role("prover")`
//! names a unique, replayable stream.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub [u8; 16]);

impl Seed {
    /// Expands a small integer, as typed on a command line.
    pub fn from_u64(v: u64) -> Self {
        Self::hashed(b"seed/u64", &v.to_be_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Decode(e.to_string()))?;
        let arr: [u8; 16] = bytes
            .try_into()
            .map_err(|_| Error::Decode(format!("seed must be 32 hex digits, got `{s}`")))?;
        Ok(Seed(arr))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Child seed for `(label, index)`.
    pub fn child(&self, label: &str, index: u64) -> Seed {
        let mut buf = Vec::with_capacity(16 + label.len() + 12);
        buf.extend_from_slice(&self.0);
        buf.extend_from_slice(&(label.len() as u32).to_be_bytes());
        buf.extend_from_slice(label.as_bytes());
        buf.extend_from_slice(&index.to_be_bytes());
        Self::hashed(b"seed/child", &buf)
    }

    /// Child seed for a named role within a trial.
    pub fn role(&self, role: &str) -> Seed {
        self.child(role, 0)
    }

    pub fn trial(&self, t: u64) -> Seed {
        self.child("trial", t)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(b"qdepth/rng");
        h.update(self.0);
        let out = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&out);
        ChaCha20Rng::from_seed(key)
    }

    fn hashed(domain: &[u8], data: &[u8]) -> Seed {
        let mut h = Sha256::new();
        h.update(domain);
        h.update(data);
        let out = h.finalize();
        let mut s = [0u8; 16];
        s.copy_from_slice(&out[..16]);
        Seed(s)
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", self.to_hex())
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Seed::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
