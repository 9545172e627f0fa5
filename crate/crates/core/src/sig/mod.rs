//! Signature schemes used to authenticate codeword blocks.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::bits::BitString;

pub mod forge;
pub mod schnorr;

pub use forge::{run_forgery_game, ForgeryAdversary, ForgeryContext, ForgeryReport};
pub use schnorr::Schnorr;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SigError {
    #[error("unsupported security parameter {0}")]
    UnsupportedLambda(u32),
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

/// Secret signing key. Opaque to everything except the scheme that issued it.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    bytes: Vec<u8>,
}

impl SecretKey {
    pub(crate) fn new(bytes: Vec<u8>) -> Self {
        Self { bytes }
    }

    pub(crate) fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[cfg(feature = "sk-export")]
    pub fn export(&self) -> Vec<u8> {
        self.bytes.clone()
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub pk: BitString,
    pub sk: SecretKey,
    pub lambda: u32,
}

/// (Gen, Sign, Ver) with fixed signature and public-key lengths.
pub trait SignatureScheme: Send + Sync {
    fn name(&self) -> &'static str;
    fn lambda(&self) -> u32;
    /// Signature length r(λ) in bits.
    fn sig_len(&self) -> usize;
    fn pk_len(&self) -> usize;
    fn gen(&self, rng: &mut dyn RngCore) -> KeyPair;
    fn sign(&self, sk: &SecretKey, m: &BitString) -> BitString;
    /// Deterministic. Wrong-length `pk` or `sig` is an error, not a rejection.
    fn verify(&self, pk: &BitString, m: &BitString, sig: &BitString) -> Result<bool, SigError>;

    /// `verify` with malformed input counted as rejection.
    fn accepts(&self, pk: &BitString, m: &BitString, sig: &BitString) -> bool {
        self.verify(pk, m, sig).unwrap_or(false)
    }
}
