//! Local code against insertions and deletions. Each signed block is wrapped
//! as `0^b ∘ sz_enc(payload) ∘ 0^b`; the decoder finds blocks by their zero
//! buffers and locates the target block by a noisy binary search over positions.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    majority, AcceptedPair, BlockOutcome, EncodeDebug, Encoding, Failure, LocalDecoder, Memo, PayloadLayout,
    SignedBlockPayload,
};
use crate::bits::{ceil_log2, BitString};
use crate::error::{Error, Result};
use crate::inner::InnerInsDelCode;
use crate::oracle::ReceivedWordOracle;
use crate::sig::SignatureScheme;

pub mod decomp;
pub mod params;

pub use decomp::{classify_gamma_good, optimal_block_decomposition, BlockDecomposition, GammaGoodReport};
pub use params::{compute_insdel_params, InsDelParams};

/// Parameters with ρ_sz taken from the inner code actually built for `τ`.
pub fn insdel_params_from_inner(
    lambda: u32,
    k: usize,
    r: usize,
    beta_sz: Ratio<u64>,
    rho_star: Ratio<u64>,
    target_p: f64,
) -> Result<InsDelParams> {
    let tau = 3 * r + (ceil_log2(k as u64) as usize).max(1);
    let inner = InnerInsDelCode::new(tau, beta_sz)?;
    compute_insdel_params(lambda, k, r, inner.rho_sz(), beta_sz, rho_star, target_p)
}

/// A block recovered by BlockDec, with the received-word span its core occupied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockHit {
    pub payload: SignedBlockPayload,
    /// Inclusive 1-based core span in the received word.
    pub span: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Search,
    /// Reads block `j` at its uncorrupted offsets.
    Positional,
}

#[derive(Clone)]
pub struct InsDelCrldc {
    params: InsDelParams,
    layout: PayloadLayout,
    inner: InnerInsDelCode,
    scheme: Arc<dyn SignatureScheme>,
    rule: Rule,
    scan_radius: usize,
    memo: Arc<Memo<BitString, Option<BitString>>>,
}

/// Bit cache for one BlockDec call, so re-reads are free. Covers every
/// position the call can touch; anything outside goes straight to the oracle.
struct Reader<'o, 'w> {
    oracle: &'o mut ReceivedWordOracle<'w>,
    lo: usize,
    seen: Vec<u8>,
}

const UNREAD: u8 = 2;

impl<'o, 'w> Reader<'o, 'w> {
    fn around(oracle: &'o mut ReceivedWordOracle<'w>, i: usize, reach: usize) -> Self {
        let lo = i.saturating_sub(reach).max(1);
        Self { oracle, lo, seen: vec![UNREAD; 2 * reach + 1] }
    }

    fn len(&self) -> usize {
        self.oracle.len()
    }

    fn get(&mut self, p: usize) -> bool {
        let slot = p.checked_sub(self.lo).filter(|&s| s < self.seen.len());
        if let Some(s) = slot {
            if self.seen[s] != UNREAD {
                return self.seen[s] == 1;
            }
        }
        let b = self.oracle.query(p).unwrap_or(false);
        if let Some(s) = slot {
            self.seen[s] = b as u8;
        }
        b
    }

    fn range(&mut self, a: usize, b: usize) -> BitString {
        (a..=b).map(|p| self.get(p)).collect()
    }
}

/// Walks away from an anchor and reports successive core boundaries.
/// A core boundary is a run of at least two zeros or the end of the word.
struct Scan {
    pos: usize,
    zeros: usize,
    done: bool,
    left: bool,
    limit: usize,
}

impl Scan {
    fn new(anchor: usize, left: bool, radius: usize, len: usize) -> Self {
        let limit = if left { anchor.saturating_sub(radius).max(1) } else { (anchor + radius).min(len) };
        Self { pos: anchor, zeros: 0, done: false, left, limit }
    }

    fn next(&mut self, rd: &mut Reader<'_, '_>) -> Option<usize> {
        while !self.done {
            let at_edge = if self.left { self.pos == 1 } else { self.pos == rd.len() };
            if at_edge {
                self.done = true;
                return Some(if self.left { self.zeros + 1 } else { rd.len() - self.zeros });
            }
            if self.pos == self.limit {
                self.done = true;
                return None;
            }
            let p = if self.left { self.pos - 1 } else { self.pos + 1 };
            self.pos = p;
            if !rd.get(p) {
                self.zeros += 1;
                continue;
            }
            let z = std::mem::take(&mut self.zeros);
            if z >= 2 {
                return Some(if self.left { p + z + 1 } else { p - z - 1 });
            }
        }
        None
    }
}

const MAX_CANDIDATES: usize = 4;
const BOUNDARIES_PER_SIDE: usize = 3;

impl InsDelCrldc {
    pub fn new(params: InsDelParams, scheme: Arc<dyn SignatureScheme>) -> Result<Self> {
        if scheme.sig_len() != params.r || scheme.pk_len() != params.r {
            return Err(Error::ParamMismatch(format!(
                "scheme has sig_len {} and pk_len {}, the InsDel layout needs both equal to r = {}",
                scheme.sig_len(),
                scheme.pk_len(),
                params.r
            )));
        }
        let inner = InnerInsDelCode::new(params.tau, params.beta_sz)?;
        if params.rho_sz > inner.rho_sz() {
            return Err(Error::ParamMismatch(format!(
                "declared ρ_sz = {} exceeds the inner code's radius {}",
                params.rho_sz,
                inner.rho_sz()
            )));
        }
        if inner.codeword_len() != params.core_len {
            return Err(Error::ParamMismatch("core length differs from the inner codeword length".into()));
        }
        let layout = PayloadLayout { r: params.r, sig_len: params.r, pk_len: params.r, index_len: params.index_len };
        let scan_radius = (params.scan_slack * params.max_good_interval()).ceil() as usize;
        Ok(Self { params, layout, inner, scheme, rule: Rule::Search, scan_radius, memo: Arc::new(Memo::new()) })
    }

    /// Decoder that reads blocks at their uncorrupted offsets instead of searching.
    pub fn naive(&self) -> Self {
        Self { rule: Rule::Positional, ..self.clone() }
    }

    pub fn params(&self) -> &InsDelParams {
        &self.params
    }

    pub fn layout(&self) -> &PayloadLayout {
        &self.layout
    }

    pub fn inner(&self) -> &InnerInsDelCode {
        &self.inner
    }

    pub fn scheme(&self) -> &dyn SignatureScheme {
        self.scheme.as_ref()
    }

    fn reach(&self) -> usize {
        2 * self.scan_radius + self.params.core_len
    }

    /// Most reads one BlockDec call can make.
    pub fn block_dec_max_queries(&self) -> u64 {
        (4 * self.scan_radius + self.params.core_len + 1) as u64
    }

    pub fn encode(&self, x: &BitString, rng: &mut dyn RngCore) -> Result<Encoding> {
        let InsDelParams { k, r, d, buffer_len, block_len, .. } = self.params;
        if x.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: x.len() });
        }
        let keys = self.scheme.gen(rng);
        let buffer = BitString::zeros(buffer_len);
        let mut codeword = BitString::with_capacity(self.params.big_k);
        let mut payloads = Vec::with_capacity(d);
        let mut boundaries = Vec::with_capacity(d);
        for (b, x_block) in super::split_message(x, r, d).into_iter().enumerate() {
            let j = b + 1;
            let sigma = self.scheme.sign(&keys.sk, &self.layout.signed_message(&x_block, j));
            let payload = SignedBlockPayload { x_block, sigma, pk: keys.pk.clone(), index: j };
            codeword.extend_from(&buffer);
            codeword.extend_from(&self.inner.encode(&payload.serialize(&self.layout))?);
            codeword.extend_from(&buffer);
            payloads.push(payload);
            boundaries.push((b * block_len + 1, j * block_len));
        }
        Ok(Encoding { codeword, debug: EncodeDebug { pk: keys.pk, layout: self.layout, payloads, boundaries } })
    }

    fn sz_dec(&self, core: BitString) -> Option<SignedBlockPayload> {
        let decoded = self.memo.get_or_insert_with(core.clone(), || self.inner.decode(&core))?;
        SignedBlockPayload::parse(&decoded, &self.layout).ok()
    }

    /// Decodes the block around position `i` (1-based) of the received word, or ⊥.
    pub fn block_dec(&self, oracle: &mut ReceivedWordOracle<'_>, i: usize) -> Result<Option<BlockHit>> {
        if i == 0 || i > oracle.len() {
            return Err(Error::IndexOutOfRange { index: i, max: oracle.len() });
        }
        let mut rd = Reader::around(oracle, i, self.reach());
        Ok(self.block_dec_in(&mut rd, i))
    }

    fn block_dec_in(&self, rd: &mut Reader<'_, '_>, i: usize) -> Option<BlockHit> {
        let n = rd.len();
        let radius = self.scan_radius;
        // Longer zero runs than two buffers plus correctable slack mean no core here.
        let max_run = 2 * self.params.buffer_len + self.inner.max_edits();
        let anchor = if rd.get(i) {
            i
        } else {
            let (mut a, mut b) = (i, i);
            while a > 1 && !rd.get(a - 1) {
                a -= 1;
                if i - a >= max_run {
                    return None;
                }
            }
            while b < n && !rd.get(b + 1) {
                b += 1;
                if b - a >= max_run {
                    return None;
                }
            }
            let run = b - a + 1;
            if run == 1 && a > 1 && b < n {
                i
            } else if a == 1 {
                b + 1
            } else if b == n {
                a - 1
            } else if i - a < run / 2 {
                a - 1
            } else {
                b + 1
            }
        };
        if anchor == 0 || anchor > n {
            return None;
        }

        let lc = self.params.core_len;
        let tol = self.inner.max_edits();
        let fits = |s: usize, e: usize| e >= s && (e - s + 1).abs_diff(lc) <= tol;
        let mut left = Scan::new(anchor, true, radius, n);
        let mut right = Scan::new(anchor, false, radius, n);
        let mut starts: Vec<usize> = left.next(rd).into_iter().collect();
        let mut ends: Vec<usize> = right.next(rd).into_iter().collect();
        let mut tried = Vec::new();
        if let (Some(&s), Some(&e)) = (starts.first(), ends.first()) {
            if fits(s, e) {
                tried.push((s, e));
                if let Some(hit) = self.try_core(rd, s, e) {
                    return Some(hit);
                }
            }
        }

        while starts.len() < BOUNDARIES_PER_SIDE {
            match left.next(rd) {
                Some(s) => starts.push(s),
                None => break,
            }
        }
        while ends.len() < BOUNDARIES_PER_SIDE {
            match right.next(rd) {
                Some(e) => ends.push(e),
                None => break,
            }
        }
        let mut cands: Vec<(usize, usize)> =
            starts.iter().flat_map(|&s| ends.iter().map(move |&e| (s, e))).filter(|&(s, e)| fits(s, e)).collect();
        // Cores cut to the expected length cover a destroyed separator on either side.
        if let Some(&s) = starts.first() {
            if s + lc - 1 <= n && s + lc > anchor {
                cands.push((s, s + lc - 1));
            }
        }
        if let Some(&e) = ends.first() {
            if e >= lc && e + 1 - lc <= anchor {
                cands.push((e + 1 - lc, e));
            }
        }
        cands.sort_by_key(|&(s, e)| ((e - s + 1).abs_diff(lc), s, e));
        cands.dedup();
        cands.retain(|c| !tried.contains(c));
        cands.into_iter().take(MAX_CANDIDATES - tried.len()).find_map(|(s, e)| self.try_core(rd, s, e))
    }

    fn try_core(&self, rd: &mut Reader<'_, '_>, s: usize, e: usize) -> Option<BlockHit> {
        let core = rd.range(s, e);
        self.sz_dec(core).map(|payload| BlockHit { payload, span: (s, e) })
    }

    /// Noisy binary search for block `j`: returns its payload or ⊥.
    pub fn nbs(&self, oracle: &mut ReceivedWordOracle<'_>, j: usize, seed: u64) -> Result<Option<SignedBlockPayload>> {
        if j == 0 || j > self.params.d {
            return Err(Error::IndexOutOfRange { index: j, max: self.params.d });
        }
        let n = oracle.len();
        if n == 0 {
            return Ok(None);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reps = (ceil_log2(n as u64) as usize).max(1);
        let max_probes = 3 * reps;
        let budget = self.params.nbs_query_bound(n);
        let worst = self.block_dec_max_queries();
        let start = oracle.queries();
        let mut votes: BTreeMap<BitString, (usize, SignedBlockPayload)> = BTreeMap::new();
        'search: for _ in 0..reps {
            let (mut lo, mut hi) = (1usize, n);
            let mut probes = 0;
            let mut found = None;
            while lo <= hi && probes < max_probes {
                if oracle.queries() - start + worst > budget {
                    break 'search;
                }
                let third = (hi - lo + 1) / 3;
                let p = rng.gen_range(lo + third..=hi - third);
                probes += 1;
                let mut rd = Reader::around(oracle, p, self.reach());
                let Some(hit) = self.block_dec_in(&mut rd, p) else { continue };
                match hit.payload.index.cmp(&j) {
                    std::cmp::Ordering::Equal => {
                        found = Some(hit.payload);
                        break;
                    }
                    std::cmp::Ordering::Less => lo = p.max(hit.span.1) + 1,
                    std::cmp::Ordering::Greater => match p.min(hit.span.0).checked_sub(1) {
                        Some(h) => hi = h,
                        None => break,
                    },
                }
            }
            if let Some(payload) = found {
                let entry = votes.entry(payload.serialize(&self.layout)).or_insert((0, payload));
                entry.0 += 1;
                if entry.0 > reps / 2 {
                    break;
                }
            }
        }
        let top = votes.values().map(|v| v.0).max().unwrap_or(0);
        let best = votes.into_values().find(|v| v.0 == top).map(|v| v.1);
        Ok(best.filter(|p| p.index == j))
    }

    fn positional(&self, oracle: &mut ReceivedWordOracle<'_>, j: usize) -> Option<SignedBlockPayload> {
        let InsDelParams { buffer_len, core_len, block_len, .. } = self.params;
        let s = (j - 1) * block_len + buffer_len + 1;
        self.sz_dec(oracle.query_range(s, s + core_len - 1))
    }
}

impl LocalDecoder for InsDelCrldc {
    fn name(&self) -> &str {
        match self.rule {
            Rule::Search => "insdel",
            Rule::Positional => "insdel-naive",
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
        let InsDelParams { d, mu, .. } = self.params;
        if j == 0 || j > d {
            return Err(Error::IndexOutOfRange { index: j, max: d });
        }
        let start = oracle.queries();
        let n = oracle.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keys = Vec::with_capacity(mu);
        let key_budget = self.params.decode_query_bound(n).saturating_sub(self.params.nbs_query_bound(n));
        for _ in 0..mu {
            let fits = oracle.queries() - start + self.block_dec_max_queries() <= key_budget;
            let key = match self.rule {
                _ if n == 0 || !fits => None,
                Rule::Search => {
                    let p = rng.gen_range(1..=n);
                    let mut rd = Reader::around(oracle, p, self.reach());
                    self.block_dec_in(&mut rd, p).map(|h| h.payload.pk)
                }
                Rule::Positional => self.positional(oracle, rng.gen_range(1..=d)).map(|p| p.pk),
            };
            keys.push(key);
        }
        let vote = majority(&keys)?;
        let target = match self.rule {
            Rule::Search => self.nbs(oracle, j, rng.next_u64())?,
            Rule::Positional => self.positional(oracle, j),
        };
        let bot = |failure| BlockOutcome {
            j,
            x_block: None,
            queries: 0,
            pk_star: vote.value.clone(),
            pk_tie: vote.tie,
            failure,
            accepted: None,
        };
        let mut out = match (&vote.value, target) {
            (None, _) => bot(Failure::KeyBot),
            (Some(_), None) => bot(Failure::BlockBot),
            (Some(pk), Some(target)) => {
                let message = self.layout.signed_message(&target.x_block, j);
                if self.scheme.accepts(pk, &message, &target.sigma) {
                    BlockOutcome {
                        x_block: Some(target.x_block),
                        failure: Failure::None,
                        accepted: Some(AcceptedPair { message, signature: target.sigma }),
                        ..bot(Failure::None)
                    }
                } else {
                    bot(Failure::Verification)
                }
            }
        };
        out.queries = oracle.queries() - start;
        Ok(out)
    }
}
