//! Corruption channels and named attacks. Every attack checks its output
//! against its declared budget with an exact distance computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crldc::hamming::HammingCrldc;
use crate::crldc::{EncodeDebug, SignedBlockPayload};
use crate::distance::{edit, hamming, DistanceReport, Metric};
use crate::error::{Error, Result};
use crate::util::big_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    None,
    RandomHamming,
    WorstBlockHamming,
    StrawmanKeySubstitution,
    BlockSwap,
    RotationInsdel,
    RandomInsdel,
}

impl AttackKind {
    pub const ALL: [AttackKind; 7] = [
        AttackKind::None,
        AttackKind::RandomHamming,
        AttackKind::WorstBlockHamming,
        AttackKind::StrawmanKeySubstitution,
        AttackKind::BlockSwap,
        AttackKind::RotationInsdel,
        AttackKind::RandomInsdel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::RandomHamming => "random-hamming",
            AttackKind::WorstBlockHamming => "worst-block-hamming",
            AttackKind::StrawmanKeySubstitution => "strawman-key-substitution",
            AttackKind::BlockSwap => "block-swap",
            AttackKind::RotationInsdel => "rotation-insdel",
            AttackKind::RandomInsdel => "random-insdel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn metric(self) -> Metric {
        match self {
            AttackKind::RotationInsdel | AttackKind::RandomInsdel => Metric::Insdel,
            _ => Metric::Hamming,
        }
    }
}

/// A corrupted word and its exact distance from the codeword.
#[derive(Clone, Debug)]
pub struct Corruption {
    pub word: BitString,
    pub distance: DistanceReport,
}

/// `raw / denom ≤ budget`, decided exactly.
fn within(raw: u64, denom: u64, budget: &BigRational) -> bool {
    BigRational::new(BigInt::from(raw), BigInt::from(denom.max(1))) <= *budget
}

/// Post-hoc budget check shared by every attack.
pub fn check_budget(
    attack: AttackKind,
    c: &BitString,
    c_tilde: &BitString,
    budget: &BigRational,
) -> Result<DistanceReport> {
    let (report, denom) = match attack.metric() {
        Metric::Hamming => (hamming(c, c_tilde)?, c.len() as u64),
        Metric::Insdel => (edit(c, c_tilde), 2 * c.len().max(c_tilde.len()) as u64),
    };
    if !within(report.raw, denom, budget) {
        return Err(Error::BudgetExceeded {
            attack: attack.name().into(),
            distance: report.normalized,
            budget: big_f64(budget),
        });
    }
    Ok(report)
}

fn floor_usize(r: &BigRational) -> usize {
    r.floor().to_integer().to_usize().unwrap_or(usize::MAX)
}

fn finish(attack: AttackKind, c: &BitString, word: BitString, budget: &BigRational) -> Result<Corruption> {
    let distance = check_budget(attack, c, &word, budget)?;
    Ok(Corruption { word, distance })
}

/// Flips exactly `⌊ρ·|C|⌋` distinct uniformly chosen positions.
pub fn random_hamming_channel(c: &BitString, rho: &BigRational, seed: u64) -> Result<Corruption> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flips = floor_usize(&(rho * BigInt::from(c.len()))).min(c.len());
    let mut word = c.clone();
    for k in sample(&mut rng, c.len(), flips) {
        word.flip(k);
    }
    finish(AttackKind::RandomHamming, c, word, rho)
}

/// Pushes as many whole blocks as the budget allows just past the inner
/// radius: `radius + 1` symbol errors in one interleaved component, on
/// systematic symbols first so the best-effort output is wrong too.
pub fn worst_block_hamming(c: &BitString, code: &HammingCrldc, seed: u64) -> Result<Corruption> {
    let p = code.params();
    let rho = crate::util::big(p.rho);
    let inner = code.inner();
    let per_block = inner.radius() + 1;
    let blocks = (floor_usize(&(&rho * BigInt::from(p.big_k))) / per_block).min(p.d);
    if 2 * blocks >= p.d {
        return Err(Error::ConfigInvalid(format!("{blocks} of {} blocks would be destroyed", p.d)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = inner.depth();
    let targets: Vec<usize> = (0..inner.symbols()).step_by(depth).take(per_block).collect();
    if targets.len() < per_block {
        return Err(Error::ParamMismatch("inner component too short to exceed its radius".into()));
    }
    let mut word = c.clone();
    for b in sample(&mut rng, p.d, blocks) {
        for &s in &targets {
            let width = if s < inner.data_symbols() { (inner.message_len() - 8 * s).min(8) } else { 8 };
            word.flip(b * p.bl + 8 * s + rng.gen_range(0..width));
        }
    }
    finish(AttackKind::WorstBlockHamming, c, word, &rho)
}

/// Replaces block 1 with a block carrying the complemented message, signed
/// under a fresh key pair whose public key it also carries.
pub fn strawman_key_substitution(
    c: &BitString,
    debug: &EncodeDebug,
    code: &HammingCrldc,
    rho: &BigRational,
    seed: u64,
) -> Result<Corruption> {
    let p = code.params();
    if !within(p.bl as u64, p.big_k as u64, rho) {
        return Err(Error::BudgetExceeded {
            attack: AttackKind::StrawmanKeySubstitution.name().into(),
            distance: p.bl as f64 / p.big_k as f64,
            budget: big_f64(rho),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = code.scheme().gen(&mut rng);
    let x_block: BitString = debug.payloads[0].x_block.iter().map(|b| !b).collect();
    let sigma = code.scheme().sign(&keys.sk, &code.layout().signed_message(&x_block, 1));
    let fake = SignedBlockPayload { x_block, sigma, pk: keys.pk, index: 1 };
    let block = code.inner().encode(&fake.serialize(code.layout()))?;
    let word = block.concat(&c.slice(p.bl + 1, c.len()).expect("codeword has more than one block"));
    finish(AttackKind::StrawmanKeySubstitution, c, word, rho)
}

/// Exchanges blocks `a` and `b` (1-based), each `block_len` bits.
pub fn block_swap(c: &BitString, block_len: usize, a: usize, b: usize, rho: &BigRational) -> Result<Corruption> {
    let blocks = c.len() / block_len;
    for j in [a, b] {
        if j == 0 || j > blocks {
            return Err(Error::IndexOutOfRange { index: j, max: blocks });
        }
    }
    let mut word = c.clone();
    for k in 0..block_len {
        let (pa, pb) = ((a - 1) * block_len + k, (b - 1) * block_len + k);
        word.set(pa, c[pb]);
        word.set(pb, c[pa]);
    }
    finish(AttackKind::BlockSwap, c, word, rho)
}

/// Splits the last block at a seeded point and wraps its tail to the front:
/// `C₁⁽ᵈ⁾ ∘ C⁽¹⁾ ∘ … ∘ C⁽ᵈ⁻¹⁾ ∘ C₀⁽ᵈ⁾`.
pub fn rotation_insdel(c: &BitString, block_len: usize, rho: &BigRational, seed: u64) -> Result<Corruption> {
    if block_len < 2 || block_len > c.len() {
        return Err(Error::ConfigInvalid(format!("block length {block_len} for a {}-bit word", c.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quarter = block_len / 4;
    let split = rng.gen_range(quarter.max(1)..=(block_len - quarter).min(block_len - 1));
    let n = c.len();
    let cut = n - block_len + split;
    let word = c.slice(cut + 1, n).expect("tail").concat(&c.slice(1, cut).expect("head"));
    finish(AttackKind::RotationInsdel, c, word, rho)
}

/// Applies `⌊ρ·2|C|⌋` random single-bit insertions and deletions.
pub fn random_insdel_channel(c: &BitString, rho: &BigRational, seed: u64) -> Result<Corruption> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops = floor_usize(&(rho * BigInt::from(2 * c.len())));
    let mut word = c.clone();
    for _ in 0..ops {
        if word.is_empty() || rng.gen_bool(0.5) {
            let at = rng.gen_range(0..=word.len());
            word.insert(at, rng.gen());
        } else {
            let at = rng.gen_range(0..word.len());
            word.remove(at);
        }
    }
    finish(AttackKind::RandomInsdel, c, word, rho)
}

/// Identity channel, for completeness runs.
pub fn no_corruption(c: &BitString) -> Corruption {
    Corruption { word: c.clone(), distance: DistanceReport { metric: Metric::Hamming, raw: 0, normalized: 0.0 } }
}

/// Raw edit budget `⌊ρ·2n⌋` for a word of length `n`.
pub fn raw_insdel_budget(rho: &BigRational, n: usize) -> u64 {
    if rho.is_zero() {
        return 0;
    }
    floor_usize(&(rho * BigInt::from(2 * n))) as u64
}
