//! Existential-forgery experiment with a signing oracle.

use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{KeyPair, SignatureScheme};
use crate::bits::BitString;

/// What an adversary sees during one trial: the public key and a signing oracle.
pub struct ForgeryContext<'a> {
    scheme: &'a dyn SignatureScheme,
    keys: &'a KeyPair,
    queried: HashSet<BitString>,
    leaked: bool,
    pub rng: ChaCha8Rng,
}

impl<'a> ForgeryContext<'a> {
    pub fn pk(&self) -> &BitString {
        &self.keys.pk
    }

    pub fn scheme(&self) -> &dyn SignatureScheme {
        self.scheme
    }

    pub fn sign(&mut self, m: &BitString) -> BitString {
        self.queried.insert(m.clone());
        self.scheme.sign(&self.keys.sk, m)
    }

    /// Signs without recording the query. Only for harness sanity checks;
    /// the trial is reported as leaked.
    pub fn sign_out_of_band(&mut self, m: &BitString) -> BitString {
        self.leaked = true;
        self.scheme.sign(&self.keys.sk, m)
    }
}

pub trait ForgeryAdversary {
    fn name(&self) -> &'static str;
    fn forge(&mut self, ctx: &mut ForgeryContext<'_>) -> (BitString, BitString);
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForgeryReport {
    pub adversary: String,
    pub trials: u64,
    pub wins: u64,
    pub leaked_trials: u64,
    pub win_rate: f64,
}

/// Fresh keys per trial; a win is a verifying pair on an unqueried message.
pub fn run_forgery_game(
    scheme: &dyn SignatureScheme,
    adversary: &mut dyn ForgeryAdversary,
    trials: u64,
    seed: u64,
) -> ForgeryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0;
    let mut leaked_trials = 0;
    for _ in 0..trials {
        let keys = scheme.gen(&mut rng);
        let mut ctx = ForgeryContext {
            scheme,
            keys: &keys,
            queried: HashSet::new(),
            leaked: false,
            rng: ChaCha8Rng::seed_from_u64(rng.next_u64()),
        };
        let (m, sig) = adversary.forge(&mut ctx);
        if ctx.leaked {
            leaked_trials += 1;
        }
        if !ctx.queried.contains(&m) && scheme.accepts(&keys.pk, &m, &sig) {
            wins += 1;
        }
    }
    ForgeryReport {
        adversary: adversary.name().to_string(),
        trials,
        wins,
        leaked_trials,
        win_rate: if trials == 0 { 0.0 } else { wins as f64 / trials as f64 },
    }
}

fn random_bits(rng: &mut impl Rng, n: usize) -> BitString {
    (0..n).map(|_| rng.gen()).collect()
}

/// Asks for a signature, then flips one message bit and possibly one signature bit.
pub struct BitFlip {
    pub message_len: usize,
}

impl ForgeryAdversary for BitFlip {
    fn name(&self) -> &'static str {
        "bit-flip"
    }

    fn forge(&mut self, ctx: &mut ForgeryContext<'_>) -> (BitString, BitString) {
        let n = self.message_len.max(1);
        let m = random_bits(&mut ctx.rng, n);
        let mut sig = ctx.sign(&m);
        let mut forged = m.clone();
        forged.flip(ctx.rng.gen_range(0..n));
        if ctx.rng.gen_bool(0.5) {
            let k = ctx.rng.gen_range(0..sig.len());
            sig.flip(k);
        }
        (forged, sig)
    }
}

/// Signs a fresh message under its own key and presents it for the target key.
pub struct CrossKey {
    pub message_len: usize,
}

impl ForgeryAdversary for CrossKey {
    fn name(&self) -> &'static str {
        "cross-key"
    }

    fn forge(&mut self, ctx: &mut ForgeryContext<'_>) -> (BitString, BitString) {
        let scheme = ctx.scheme;
        let own = scheme.gen(&mut ctx.rng);
        let m = random_bits(&mut ctx.rng, self.message_len);
        let sig = scheme.sign(&own.sk, &m);
        (m, sig)
    }
}

/// Returns a pair obtained from the oracle. Never counts as a win.
pub struct Replay {
    pub message_len: usize,
}

impl ForgeryAdversary for Replay {
    fn name(&self) -> &'static str {
        "replay"
    }

    fn forge(&mut self, ctx: &mut ForgeryContext<'_>) -> (BitString, BitString) {
        let m = random_bits(&mut ctx.rng, self.message_len);
        let sig = ctx.sign(&m);
        (m, sig)
    }
}

/// Uniformly random message and signature.
pub struct RandomGuess {
    pub message_len: usize,
}

impl ForgeryAdversary for RandomGuess {
    fn name(&self) -> &'static str {
        "random"
    }

    fn forge(&mut self, ctx: &mut ForgeryContext<'_>) -> (BitString, BitString) {
        let m = random_bits(&mut ctx.rng, self.message_len);
        let n = ctx.scheme().sig_len();
        let sig = random_bits(&mut ctx.rng, n);
        (m, sig)
    }
}

/// Harness check: signs with the real key outside the oracle, so it always wins.
pub struct HonestSigner {
    pub message_len: usize,
}

impl ForgeryAdversary for HonestSigner {
    fn name(&self) -> &'static str {
        "honest-signer"
    }

    fn forge(&mut self, ctx: &mut ForgeryContext<'_>) -> (BitString, BitString) {
        let m = random_bits(&mut ctx.rng, self.message_len);
        let sig = ctx.sign_out_of_band(&m);
        (m, sig)
    }
}

/// The four black-box adversaries, sized for `message_len`-bit messages.
pub fn shipped_adversaries(message_len: usize) -> Vec<Box<dyn ForgeryAdversary>> {
    vec![
        Box::new(BitFlip { message_len }),
        Box::new(CrossKey { message_len }),
        Box::new(Replay { message_len }),
        Box::new(RandomGuess { message_len }),
    ]
}
