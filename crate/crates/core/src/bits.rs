//! Owned bit strings with 1-indexed public accessors.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("invalid bit character {0:?}")]
    BadChar(char),
    #[error("byte buffer too short: need {need} bytes, have {have}")]
    ShortBuffer { need: usize, have: usize },
    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: usize },
}

/// A finite string over {0,1}.
///
/// Positions are 1-indexed in [`BitString::bit`] and [`BitString::slice`];
/// the `Index` impl and [`BitString::as_slice`] are 0-indexed like any Rust slice.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { bits: Vec::with_capacity(n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Parses a string of `0`/`1` characters. Whitespace and `_` are skipped.
    pub fn parse(s: &str) -> Result<Self, BitsError> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() || c == '_' => {}
                c => return Err(BitsError::BadChar(c)),
            }
        }
        Ok(Self { bits })
    }

    /// Big-endian `width`-bit encoding of `value`.
    pub fn from_uint(value: u64, width: usize) -> Result<Self, BitsError> {
        if width < 64 && value >> width != 0 {
            return Err(BitsError::Overflow { value, width });
        }
        let bits = (0..width)
            .map(|k| {
                let shift = width - 1 - k;
                shift < 64 && (value >> shift) & 1 == 1
            })
            .collect();
        Ok(Self { bits })
    }

    /// Reads the bits as a big-endian unsigned integer. Panics past 64 bits.
    pub fn to_uint(&self) -> u64 {
        assert!(self.len() <= 64, "to_uint on {} bits", self.len());
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Unpacks bytes MSB-first, keeping every bit.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_bytes_len(bytes, bytes.len() * 8).expect("length fits")
    }

    /// Unpacks the first `len` bits of `bytes`, MSB-first.
    pub fn from_bytes_len(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        let need = len.div_ceil(8);
        if bytes.len() < need {
            return Err(BitsError::ShortBuffer { need, have: bytes.len() });
        }
        let bits = (0..len).map(|k| (bytes[k / 8] >> (7 - k % 8)) & 1 == 1).collect();
        Ok(Self { bits })
    }

    /// Packs MSB-first; the final byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (k, &b) in self.bits.iter().enumerate() {
            if b {
                out[k / 8] |= 0x80 >> (k % 8);
            }
        }
        out
    }

    /// File framing: bit length as 8 little-endian bytes, then [`BitString::to_bytes`].
    pub fn to_framed(&self) -> Vec<u8> {
        let mut out = (self.len() as u64).to_le_bytes().to_vec();
        out.extend(self.to_bytes());
        out
    }

    pub fn from_framed(bytes: &[u8]) -> Result<Self, BitsError> {
        let head: [u8; 8] = bytes
            .get(..8)
            .and_then(|h| h.try_into().ok())
            .ok_or(BitsError::ShortBuffer { need: 8, have: bytes.len() })?;
        Self::from_bytes_len(&bytes[8..], u64::from_le_bytes(head) as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at 1-indexed position `i`.
    pub fn bit(&self, i: usize) -> Result<bool, BitsError> {
        if i == 0 || i > self.len() {
            return Err(BitsError::OutOfRange { index: i, len: self.len() });
        }
        Ok(self.bits[i - 1])
    }

    /// Inclusive 1-indexed slice `[a, b]`. `b = a - 1` yields the empty string.
    pub fn slice(&self, a: usize, b: usize) -> Result<Self, BitsError> {
        if a == 0 || a > b + 1 || b > self.len() {
            return Err(BitsError::OutOfRange { index: if a == 0 { 0 } else { b }, len: self.len() });
        }
        Ok(Self { bits: self.bits[a - 1..b].to_vec() })
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> Self {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    /// Flips the bit at 0-indexed `k`.
    pub fn flip(&mut self, k: usize) {
        self.bits[k] = !self.bits[k];
    }

    pub fn set(&mut self, k: usize, b: bool) {
        self.bits[k] = b;
    }

    pub fn insert(&mut self, k: usize, b: bool) {
        self.bits.insert(k, b);
    }

    pub fn remove(&mut self, k: usize) -> bool {
        self.bits.remove(k)
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Packs into 64-bit words, bit `k` at position `k % 64` of word `k / 64`.
    pub(crate) fn to_words_lsb(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.len().div_ceil(64)];
        for (k, &b) in self.bits.iter().enumerate() {
            if b {
                out[k / 64] |= 1 << (k % 64);
            }
        }
        out
    }
}

impl Index<usize> for BitString {
    type Output = bool;
    fn index(&self, k: usize) -> &bool {
        &self.bits[k]
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self { bits: iter.into_iter().collect() }
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        Self { bits: bits.to_vec() }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 64 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString(len={}, weight={})", self.len(), self.weight())
        }
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = BitsError;
    fn try_from(s: String) -> Result<Self, BitsError> {
        Self::parse(&s)
    }
}

/// ⌈log₂ n⌉ for n ≥ 1.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn framing_round_trip() {
        let b = BitString::parse("1011001110").unwrap();
        let f = b.to_framed();
        assert_eq!(f.len(), 8 + 2);
        assert_eq!(&f[..8], &10u64.to_le_bytes());
        assert_eq!(f[8], 0b1011_0011);
        assert_eq!(BitString::from_framed(&f).unwrap(), b);
        assert!(BitString::from_framed(&f[..9]).is_err());
        assert!(BitString::from_framed(&[1, 2]).is_err());
    }

    #[test]
    fn one_indexed_access() {
        let b = BitString::parse("10110").unwrap();
        assert_eq!(b.bit(1), Ok(true));
        assert_eq!(b.bit(2), Ok(false));
        assert_eq!(b.bit(5), Ok(false));
        assert!(b.bit(0).is_err());
        assert!(b.bit(6).is_err());
        assert_eq!(b.slice(2, 4).unwrap().to_string(), "011");
        assert!(b.slice(3, 2).unwrap().is_empty());
        assert!(b.slice(2, 6).is_err());
    }

    #[test]
    fn uint_round_trip() {
        let b = BitString::from_uint(5, 4).unwrap();
        assert_eq!(b.to_string(), "0101");
        assert_eq!(b.to_uint(), 5);
        assert!(BitString::from_uint(16, 4).is_err());
        assert_eq!(BitString::from_uint(0, 0).unwrap().len(), 0);
    }

    #[test]
    fn bytes_msb_first() {
        let b = BitString::parse("1000000011").unwrap();
        assert_eq!(b.to_bytes(), vec![0x80, 0xC0]);
        assert_eq!(BitString::from_bytes_len(&[0x80, 0xC0], 10).unwrap(), b);
        assert!(BitString::from_bytes_len(&[0x80], 10).is_err());
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(1024), 10);
    }

    #[test]
    fn serde_as_string() {
        let b = BitString::parse("0110").unwrap();
        let back: BitString = BitString::try_from(String::from(b.clone())).unwrap();
        assert_eq!(b, back);
    }
}
