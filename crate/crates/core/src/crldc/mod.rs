//! The two local codes: signed blocks under an inner code, decoded a block at a time.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::ReceivedWordOracle;

pub mod hamming;
pub mod insdel;
pub mod majority;
pub mod payload;

pub use majority::{majority, Majority};
pub use payload::{PayloadLayout, SignedBlockPayload};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Failure {
    None,
    /// The target block did not verify under the recovered key.
    Verification,
    /// Key majority came out ⊥.
    KeyBot,
    /// The target block could not be located or decoded.
    BlockBot,
}

/// A `(message, signature)` pair that passed verification during decoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AcceptedPair {
    pub message: BitString,
    pub signature: BitString,
}

/// Result of decoding one whole block; every index of the block reads from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockOutcome {
    pub j: usize,
    pub x_block: Option<BitString>,
    pub queries: u64,
    pub pk_star: Option<BitString>,
    pub pk_tie: bool,
    pub failure: Failure,
    pub accepted: Option<AcceptedPair>,
}

impl BlockOutcome {
    /// Outcome for bit `i_star` (1-based) of this block.
    pub fn at(&self, i_star: usize) -> DecodeOutcome {
        DecodeOutcome {
            value: self.x_block.as_ref().map(|x| x[i_star - 1]),
            queries: self.queries,
            pk_star: self.pk_star.clone(),
            pk_tie: self.pk_tie,
            failure: self.failure,
            accepted: self.accepted.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeOutcome {
    /// `None` is ⊥.
    pub value: Option<bool>,
    pub queries: u64,
    pub pk_star: Option<BitString>,
    pub pk_tie: bool,
    pub failure: Failure,
    pub accepted: Option<AcceptedPair>,
}

/// Public side information from an encoding: what an attacker may see.
/// The secret key is not part of it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodeDebug {
    pub pk: BitString,
    pub layout: PayloadLayout,
    pub payloads: Vec<SignedBlockPayload>,
    /// Inclusive 1-based `(first, last)` bit of each block in the codeword.
    pub boundaries: Vec<(usize, usize)>,
}

impl EncodeDebug {
    /// Every `(message, signature)` pair the encoder signed.
    pub fn issued_pairs(&self) -> HashSet<AcceptedPair> {
        self.payloads
            .iter()
            .map(|p| AcceptedPair {
                message: self.layout.signed_message(&p.x_block, p.index),
                signature: p.sigma.clone(),
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub codeword: BitString,
    pub debug: EncodeDebug,
}

/// Splits `x` into `d` blocks of `r` bits, zero-padding the last one.
pub(crate) fn split_message(x: &BitString, r: usize, d: usize) -> Vec<BitString> {
    (0..d)
        .map(|b| (0..r).map(|k| b * r + k).map(|pos| pos < x.len() && x[pos]).collect())
        .collect()
}

/// A local decoder as the estimators see it.
///
/// `decode(i, seed)` depends on `i` only through its block `⌈i/r⌉`, which is
/// what lets the harness decode a block once per seed and read off all its bits.
pub trait LocalDecoder: Sync {
    fn name(&self) -> &str;
    fn k(&self) -> usize;
    /// Message bits per block.
    fn r(&self) -> usize;
    fn blocks(&self) -> usize;
    fn decode_block(&self, oracle: &mut ReceivedWordOracle<'_>, j: usize, seed: u64) -> Result<BlockOutcome>;

    fn block_of(&self, i: usize) -> usize {
        i.div_ceil(self.r())
    }

    fn decode(&self, oracle: &mut ReceivedWordOracle<'_>, i: usize, seed: u64) -> Result<DecodeOutcome> {
        if i == 0 || i > self.k() {
            return Err(Error::IndexOutOfRange { index: i, max: self.k() });
        }
        let j = self.block_of(i);
        Ok(self.decode_block(oracle, j, seed)?.at(i - (j - 1) * self.r()))
    }
}

/// Memo table for a pure function of a bit string. Bounded; cleared when full.
#[derive(Debug, Default)]
pub struct Memo<K, V> {
    map: Mutex<HashMap<K, V>>,
}

const MEMO_CAPACITY: usize = 1 << 14;

impl<K: Eq + Hash, V: Clone> Memo<K, V> {
    pub fn new() -> Self {
        Self { map: Mutex::new(HashMap::new()) }
    }

    pub fn get_or_insert_with(&self, key: K, f: impl FnOnce() -> V) -> V {
        if let Some(v) = self.map.lock().expect("memo poisoned").get(&key) {
            return v.clone();
        }
        let v = f();
        let mut map = self.map.lock().expect("memo poisoned");
        if map.len() >= MEMO_CAPACITY {
            map.clear();
        }
        map.insert(key, v.clone());
        v
    }

    pub fn clear(&self) {
        self.map.lock().expect("memo poisoned").clear();
    }
}
