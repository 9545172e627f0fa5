//! Local code against bit flips: each block carries `x_j ∘ σ_j ∘ pk ∘ j`
//! under the inner Hamming code, and the decoder trusts a block only if it
//! verifies under the majority key read from μ random blocks.

use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    majority, AcceptedPair, BlockOutcome, EncodeDebug, Encoding, Failure, LocalDecoder, Memo, PayloadLayout,
    SignedBlockPayload,
};
use crate::bits::{ceil_log2, BitString};
use crate::error::{Error, Result};
use crate::inner::InnerHammingCode;
use crate::oracle::ReceivedWordOracle;
use crate::sig::SignatureScheme;
use crate::util::{ratio_f64, ratio_str};

#[derive(Clone, Debug, Serialize)]
pub struct HammingParams {
    pub lambda: u32,
    pub k: usize,
    pub r: usize,
    pub pk_len: usize,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub c: Ratio<u64>,
    pub mu: usize,
    pub d: usize,
    pub index_len: usize,
    pub payload_len: usize,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub beta_in: Ratio<u64>,
    pub bl: usize,
    pub big_k: usize,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub rho_in: Ratio<u64>,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub rho: Ratio<u64>,
    pub p: f64,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub delta: Ratio<u64>,
    pub locality_bound: u64,
}

fn check_c(c: Ratio<u64>) -> Result<()> {
    if c <= Ratio::from_integer(0) || c >= Ratio::new(1, 2) {
        return Err(Error::ConfigInvalid(format!("c = {c} must lie in (0, 1/2)")));
    }
    Ok(())
}

/// Lower bound on the probability that the key majority over μ samples is right.
pub fn success_probability(c: Ratio<u64>, mu: usize) -> f64 {
    let c = ratio_f64(&c);
    1.0 - (-(mu as f64) * (0.5 - c).powi(2) / (2.0 * (1.0 - c))).exp()
}

/// Smallest μ with `success_probability(c, μ) ≥ target_p`.
pub fn mu_for(c: Ratio<u64>, target_p: f64) -> Result<usize> {
    check_c(c)?;
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(Error::InfeasibleTarget(format!("target_p = {target_p} is not in (0, 1)")));
    }
    let cf = ratio_f64(&c);
    let rate = (0.5 - cf).powi(2) / (2.0 * (1.0 - cf));
    let mut mu = ((-(1.0 - target_p).ln()) / rate).ceil().max(1.0) as usize;
    while mu > 1 && success_probability(c, mu - 1) >= target_p {
        mu -= 1;
    }
    while success_probability(c, mu) < target_p {
        mu += 1;
    }
    Ok(mu)
}

pub fn compute_hamming_params(
    lambda: u32,
    k: usize,
    r: usize,
    pk_len: usize,
    c: Ratio<u64>,
    target_p: f64,
    beta_in: Ratio<u64>,
) -> Result<HammingParams> {
    let mu = mu_for(c, target_p)?;
    hamming_params_with_mu(lambda, k, r, pk_len, c, mu, beta_in)
}

/// Same derivation with μ fixed directly.
pub fn hamming_params_with_mu(
    lambda: u32,
    k: usize,
    r: usize,
    pk_len: usize,
    c: Ratio<u64>,
    mu: usize,
    beta_in: Ratio<u64>,
) -> Result<HammingParams> {
    check_c(c)?;
    if k == 0 || r == 0 || mu == 0 {
        return Err(Error::ConfigInvalid("k, r and μ must be positive".into()));
    }
    let d = k.div_ceil(r);
    let index_len = (ceil_log2(d as u64) as usize).max(1);
    let payload_len = 2 * r + pk_len + index_len;
    let inner = InnerHammingCode::new(payload_len, beta_in)?;
    let bl = inner.codeword_len();
    let rho_in = inner.rho_in();
    Ok(HammingParams {
        lambda,
        k,
        r,
        pk_len,
        c,
        mu,
        d,
        index_len,
        payload_len,
        beta_in,
        bl,
        big_k: d * bl,
        rho_in,
        rho: c * rho_in,
        p: success_probability(c, mu),
        delta: Ratio::new(1, 2),
        locality_bound: (mu as u64 + 1) * bl as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KeyRule {
    /// Verify under the majority key (the real decoder).
    Majority,
    /// Verify under the key parsed from the target block itself.
    Parsed,
}

#[derive(Clone)]
pub struct HammingCrldc {
    params: HammingParams,
    layout: PayloadLayout,
    inner: InnerHammingCode,
    scheme: Arc<dyn SignatureScheme>,
    key_rule: KeyRule,
    memo: Arc<Memo<BitString, BitString>>,
}

impl HammingCrldc {
    pub fn new(params: HammingParams, scheme: Arc<dyn SignatureScheme>) -> Result<Self> {
        if scheme.sig_len() != params.r {
            return Err(Error::ParamMismatch(format!(
                "signature length {} differs from r = {}",
                scheme.sig_len(),
                params.r
            )));
        }
        if scheme.pk_len() != params.pk_len {
            return Err(Error::ParamMismatch(format!(
                "public key length {} differs from pk_len = {}",
                scheme.pk_len(),
                params.pk_len
            )));
        }
        let inner = InnerHammingCode::new(params.payload_len, params.beta_in)?;
        let layout = PayloadLayout { r: params.r, sig_len: params.r, pk_len: params.pk_len, index_len: params.index_len };
        Ok(Self { params, layout, inner, scheme, key_rule: KeyRule::Majority, memo: Arc::new(Memo::new()) })
    }

    /// Decoder that verifies each block under the key it carries. Broken on
    /// purpose; it exists to show why the majority key matters.
    pub fn strawman(&self) -> Self {
        Self { key_rule: KeyRule::Parsed, ..self.clone() }
    }

    pub fn params(&self) -> &HammingParams {
        &self.params
    }

    pub fn layout(&self) -> &PayloadLayout {
        &self.layout
    }

    pub fn inner(&self) -> &InnerHammingCode {
        &self.inner
    }

    pub fn scheme(&self) -> &dyn SignatureScheme {
        self.scheme.as_ref()
    }

    pub fn encode(&self, x: &BitString, rng: &mut dyn RngCore) -> Result<Encoding> {
        let HammingParams { k, r, d, bl, .. } = self.params;
        if x.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: x.len() });
        }
        let keys = self.scheme.gen(rng);
        let mut codeword = BitString::with_capacity(self.params.big_k);
        let mut payloads = Vec::with_capacity(d);
        let mut boundaries = Vec::with_capacity(d);
        for (b, x_block) in super::split_message(x, r, d).into_iter().enumerate() {
            let j = b + 1;
            let sigma = self.scheme.sign(&keys.sk, &self.layout.signed_message(&x_block, j));
            let payload = SignedBlockPayload { x_block, sigma, pk: keys.pk.clone(), index: j };
            codeword.extend_from(&self.inner.encode(&payload.serialize(&self.layout))?);
            payloads.push(payload);
            boundaries.push((b * bl + 1, j * bl));
        }
        Ok(Encoding { codeword, debug: EncodeDebug { pk: keys.pk, layout: self.layout, payloads, boundaries } })
    }

    /// Inner-decodes block `j` (1-based) and parses it, reading exactly `bl` bits.
    pub fn read_block(&self, oracle: &mut ReceivedWordOracle<'_>, j: usize) -> SignedBlockPayload {
        let bl = self.params.bl;
        let bits = oracle.query_range((j - 1) * bl + 1, j * bl);
        let decoded = self
            .memo
            .get_or_insert_with(bits.clone(), || self.inner.decode(&bits).expect("block has codeword length"));
        SignedBlockPayload::parse(&decoded, &self.layout).expect("inner decoder returns payload_len bits")
    }
}

impl LocalDecoder for HammingCrldc {
    fn name(&self) -> &str {
        match self.key_rule {
            KeyRule::Majority => "hamming",
            KeyRule::Parsed => "hamming-strawman",
        }
    }

    fn k(&self) -> usize {
        self.params.k
    }

    fn r(&self) -> usize {
        self.params.r
    }

    fn blocks(&self) -> usize {
        self.params.d
    }

    fn decode_block(&self, oracle: &mut ReceivedWordOracle<'_>, j: usize, seed: u64) -> Result<BlockOutcome> {
        let HammingParams { d, mu, big_k, .. } = self.params;
        if oracle.len() != big_k {
            return Err(Error::LengthMismatch { expected: big_k, got: oracle.len() });
        }
        if j == 0 || j > d {
            return Err(Error::IndexOutOfRange { index: j, max: d });
        }
        let start = oracle.queries();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keys: Vec<Option<BitString>> =
            (0..mu).map(|_| Some(self.read_block(oracle, rng.gen_range(1..=d)).pk)).collect();
        let vote = majority(&keys)?;
        let target = self.read_block(oracle, j);
        let key = match self.key_rule {
            KeyRule::Majority => vote.value.clone().expect("Hamming samples are never ⊥"),
            KeyRule::Parsed => target.pk.clone(),
        };
        let message = self.layout.signed_message(&target.x_block, j);
        let ok = self.scheme.accepts(&key, &message, &target.sigma);
        Ok(BlockOutcome {
            j,
            x_block: ok.then(|| target.x_block.clone()),
            queries: oracle.queries() - start,
            pk_star: vote.value,
            pk_tie: vote.tie,
            failure: if ok { Failure::None } else { Failure::Verification },
            accepted: ok.then(|| AcceptedPair { message, signature: target.sigma }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::Schnorr;

    fn desk() -> HammingCrldc {
        let params = compute_hamming_params(128, 1024, 128, 128, Ratio::new(1, 4), 2.0 / 3.0, Ratio::new(1, 4)).unwrap();
        HammingCrldc::new(params, Arc::new(Schnorr::new(128).unwrap())).unwrap()
    }

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> BitString {
        (0..n).map(|_| rng.gen()).collect()
    }

    #[test]
    fn desk_parameters() {
        let p = desk().params().clone();
        assert_eq!((p.d, p.index_len, p.payload_len, p.bl, p.big_k), (8, 3, 387, 1548, 12384));
        assert_eq!(p.mu, 27);
        assert_eq!(p.rho, p.rho_in / 4);
        assert_eq!(p.locality_bound, 28 * 1548);
    }

    #[test]
    fn mu_closed_form() {
        // μ/24 ≥ ln 3 first holds at μ = 27.
        assert!(26.0 / 24.0 < 3f64.ln() && 27.0 / 24.0 >= 3f64.ln());
        assert_eq!(mu_for(Ratio::new(1, 4), 2.0 / 3.0).unwrap(), 27);
        assert!(matches!(mu_for(Ratio::new(1, 4), 1.0), Err(Error::InfeasibleTarget(_))));
        assert!(matches!(mu_for(Ratio::new(1, 2), 0.9), Err(Error::ConfigInvalid(_))));
        for c in 1..12u64 {
            let c = Ratio::new(c, 25);
            let bound = (2.0 * (1.0 - ratio_f64(&c)) * 3f64.ln() / (0.5 - ratio_f64(&c)).powi(2)).ceil() as usize;
            assert!(success_probability(c, bound) > 2.0 / 3.0);
        }
    }

    #[test]
    fn smaller_c_needs_fewer_samples() {
        let mut last = usize::MAX;
        for c in (1..12u64).rev() {
            let mu = mu_for(Ratio::new(c, 25), 0.9).unwrap();
            assert!(mu <= last);
            last = mu;
        }
        assert!(mu_for(Ratio::new(1, 25), 0.9).unwrap() < mu_for(Ratio::new(11, 25), 0.9).unwrap());
    }

    #[test]
    fn rho_is_c_times_rho_in() {
        let p = hamming_params_with_mu(128, 1024, 128, 128, Ratio::new(1, 4), 27, Ratio::new(1, 4)).unwrap();
        assert_eq!(p.rho, Ratio::new(1, 4) * p.rho_in);
        assert_eq!(Ratio::new(1u64, 4) * Ratio::new(1, 10), Ratio::new(1, 40));
    }

    #[test]
    fn completeness_and_exact_locality() {
        let code = desk();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_bits(&mut rng, 1024);
        let enc = code.encode(&x, &mut rng).unwrap();
        assert_eq!(enc.codeword.len(), 12384);
        for _ in 0..40 {
            let i = rng.gen_range(1..=1024);
            let mut o = ReceivedWordOracle::new(&enc.codeword);
            let out = code.decode(&mut o, i, rng.gen()).unwrap();
            assert_eq!(out.value, Some(x[i - 1]));
            assert_eq!(out.queries, 28 * 1548);
            assert_eq!(o.queries(), out.queries);
        }
    }

    #[test]
    fn single_block_when_k_below_r() {
        let params = hamming_params_with_mu(64, 20, 64, 64, Ratio::new(1, 4), 5, Ratio::new(1, 4)).unwrap();
        assert_eq!((params.d, params.index_len), (1, 1));
        let code = HammingCrldc::new(params, Arc::new(Schnorr::new(64).unwrap())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_bits(&mut rng, 20);
        let enc = code.encode(&x, &mut rng).unwrap();
        assert_eq!(enc.debug.payloads[0].x_block.slice(21, 64).unwrap(), BitString::zeros(44));
        for i in 1..=20 {
            let mut o = ReceivedWordOracle::new(&enc.codeword);
            assert_eq!(code.decode(&mut o, i, i as u64).unwrap().value, Some(x[i - 1]));
        }
        let mut o = ReceivedWordOracle::new(&enc.codeword);
        assert!(matches!(code.decode(&mut o, 21, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn rejects_mismatched_scheme() {
        let params = hamming_params_with_mu(128, 1024, 128, 128, Ratio::new(1, 4), 27, Ratio::new(1, 4)).unwrap();
        assert!(matches!(
            HammingCrldc::new(params, Arc::new(Schnorr::new(64).unwrap())),
            Err(Error::ParamMismatch(_))
        ));
    }

    #[test]
    fn decode_equals_block_decode() {
        let code = desk();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_bits(&mut rng, 1024);
        let mut word = code.encode(&x, &mut rng).unwrap().codeword;
        for k in 0..2000 {
            word.flip((k * 7919) % word.len());
        }
        for _ in 0..20 {
            let i = rng.gen_range(1..=1024);
            let seed = rng.gen();
            let a = code.decode(&mut ReceivedWordOracle::new(&word), i, seed).unwrap();
            let j = code.block_of(i);
            let b = code.decode_block(&mut ReceivedWordOracle::new(&word), j, seed).unwrap().at(i - (j - 1) * 128);
            assert_eq!(a, b);
        }
    }
}
