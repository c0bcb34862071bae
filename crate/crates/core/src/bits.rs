//! Packed, MSB-first bit strings.
//!
//! Bit 0 is the most significant bit of byte 0. Unused low bits of the last
//! byte are always zero, so byte-wise equality is bit-wise equality.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest bit string the lab will build.
pub const BIT_CAP: usize = 1 << 14;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn empty() -> Self {
        Self::zeros(0)
    }

    /// `len`-bit big-endian encoding of `value`. Panics if `len > 64` or the
    /// value does not fit.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        assert!(
            len == 64 || value >> len == 0,
            "value {value} does not fit in {len} bits"
        );
        let mut b = Self::zeros(len);
        for i in 0..len {
            b.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        b
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a {}-bit string", self.len);
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            b.set(i, bit);
        }
        b
    }

    /// Whole bytes, `8 * bytes.len()` bits.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        BitString {
            len: bytes.len() * 8,
            bytes: bytes.to_vec(),
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill(&mut bytes[..]);
        let mut b = BitString { len, bytes };
        b.clear_padding();
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed bytes; padding bits are zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u8 << (7 - (i & 7));
        if bit {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn extend(&mut self, other: &BitString) {
        if self.len % 8 == 0 {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    /// Bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        assert!(
            start <= end && end <= self.len,
            "slice {start}..{end} of {} bits",
            self.len
        );
        let mut out = BitString::zeros(end - start);
        for i in start..end {
            out.set(i - start, self.get(i));
        }
        out
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len, other.len, "xor of unequal widths");
        BitString {
            len: self.len,
            bytes: self.bytes.iter().zip(&other.bytes).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitString) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal widths");
        let ones: u32 = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn from_hex(hex_str: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(hex_str).map_err(|e| Error::Decode(e.to_string()))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Decode(format!(
                "{} hex bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let mut b = BitString { len, bytes };
        let before = b.bytes.clone();
        b.clear_padding();
        if b.bytes != before {
            return Err(Error::Decode("nonzero padding bits".into()));
        }
        Ok(b)
    }

    /// Bits as a `0`/`1` string.
    pub fn to_binary(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] &= 0xffu8 << (8 - rem);
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({})", self.to_binary())
        } else {
            write!(f, "BitString({} bits, {})", self.len, self.to_hex())
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary())
    }
}

#[derive(Serialize, Deserialize)]
struct BitStringRepr {
    len: usize,
    hex: String,
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BitStringRepr {
            len: self.len,
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BitStringRepr::deserialize(d)?;
        BitString::from_hex(&r.hex, r.len).map_err(serde::de::Error::custom)
    }
}
