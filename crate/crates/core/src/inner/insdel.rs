//! Marker-synchronized inner code against insertions and deletions.
//!
//! Layout of a codeword: `pad ∘ M ∘ P_1 ∘ M ∘ P_2 ∘ … ∘ M ∘ P_n ∘ M` where
//! `M = 11111` and each `P_s` is a 19-bit word of the form `0 (1^a 0)^*` with
//! `a ∈ {1,2,3}` carrying one RS symbol. The pad alternates `10…` so the whole
//! codeword never contains `00`, which keeps every even-length window at
//! weight ≥ 1/2 and lets callers treat any `00` as lying outside a codeword.
//!
//! The decoder treats runs of ≥ 4 ones as markers, maps every 19-bit gap
//! that is a valid payload to the frame nearest its offset, erases missing or
//! conflicting frames, and finishes with RS errors-and-erasures decoding.
//! One insertion or deletion costs at most two units of erasures + 2·errors.

use std::sync::OnceLock;

use num_rational::Ratio;

use crate::bits::{ceil_log2, BitString};
use crate::error::{Error, Result};
use crate::rs::InterleavedRs;

pub const MARKER_LEN: usize = 5;
pub const PAYLOAD_LEN: usize = 19;
pub const FRAME_LEN: usize = MARKER_LEN + PAYLOAD_LEN;
/// Shortest run of ones the decoder reads as a marker.
const MARKER_MIN_RUN: usize = 4;
/// Frames are assigned by rounding to the nearest multiple of `FRAME_LEN`.
const MAX_DRIFT: usize = FRAME_LEN / 2 - 1;

/// The 256 smallest 19-bit words `0 (1^a 0)^*`, `a ∈ {1,2,3}`, in increasing order.
fn codebook() -> &'static [u32; 256] {
    static BOOK: OnceLock<[u32; 256]> = OnceLock::new();
    BOOK.get_or_init(|| {
        let mut words = Vec::new();
        fn extend(prefix: u32, len: usize, out: &mut Vec<u32>) {
            if len == PAYLOAD_LEN {
                out.push(prefix);
                return;
            }
            for a in 1..=3 {
                if len + a + 1 <= PAYLOAD_LEN {
                    let w = (((prefix << a) | ((1 << a) - 1)) << 1) as u32;
                    extend(w, len + a + 1, out);
                }
            }
        }
        extend(0, 1, &mut words);
        words.sort_unstable();
        debug_assert_eq!(words.len(), 354);
        words[..256].try_into().expect("at least 256 words")
    })
}

fn symbol_of(word: u32) -> Option<u8> {
    codebook().binary_search(&word).ok().map(|k| k as u8)
}

#[derive(Clone, Debug)]
pub struct InnerInsDelCode {
    t: usize,
    beta_sz: Ratio<u64>,
    codeword_len: usize,
    frames: usize,
    pad_len: usize,
    rs: InterleavedRs,
    max_edits: usize,
}

impl InnerInsDelCode {
    pub fn new(t: usize, beta_sz: Ratio<u64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::TTooSmall(t));
        }
        if beta_sz <= Ratio::from_integer(0) || beta_sz > Ratio::from_integer(1) {
            return Err(Error::BadRate(format!("β_sz = {beta_sz} is not in (0, 1]")));
        }
        let len = Ratio::from_integer(t as u64) / beta_sz;
        if !len.is_integer() {
            return Err(Error::BadRate(format!("{t} / {beta_sz} = {len}")));
        }
        let codeword_len = len.to_integer() as usize;
        let m = t.div_ceil(8);
        let frames = codeword_len.saturating_sub(MARKER_LEN) / FRAME_LEN;
        if frames < m + 2 {
            return Err(Error::TTooSmall(t));
        }
        let rs = InterleavedRs::new(frames, m).map_err(|e| Error::ParamMismatch(e.to_string()))?;
        let max_edits = (rs.min_parity() / 2).min(MAX_DRIFT);
        Ok(Self {
            t,
            beta_sz,
            codeword_len,
            frames,
            pad_len: codeword_len - MARKER_LEN - FRAME_LEN * frames,
            rs,
            max_edits,
        })
    }

    pub fn message_len(&self) -> usize {
        self.t
    }

    pub fn codeword_len(&self) -> usize {
        self.codeword_len
    }

    pub fn beta_sz(&self) -> Ratio<u64> {
        self.beta_sz
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn pad_len(&self) -> usize {
        self.pad_len
    }

    /// Raw insertions + deletions always corrected.
    pub fn max_edits(&self) -> usize {
        self.max_edits
    }

    /// Normalized radius: any `y` with normalized ED ≤ this is at most
    /// `max_edits` raw edits from the codeword.
    pub fn rho_sz(&self) -> Ratio<u64> {
        let e = self.max_edits as u64;
        Ratio::new(e, 2 * (self.codeword_len as u64 + e))
    }

    /// Window length over which the weight-density guarantee is stated.
    pub fn window_len(&self) -> usize {
        (2 * ceil_log2(self.t as u64) as usize).max(2)
    }

    pub fn encode(&self, m: &BitString) -> Result<BitString> {
        if m.len() != self.t {
            return Err(Error::LengthMismatch { expected: self.t, got: m.len() });
        }
        let symbols = self.rs.encode(&m.to_bytes()).expect("message length checked");
        let mut out = BitString::with_capacity(self.codeword_len);
        let p = self.pad_len;
        if p % 2 == 1 {
            out.push(true);
        }
        for _ in 0..p / 2 {
            if p % 2 == 1 {
                out.push(false);
                out.push(true);
            } else {
                out.push(true);
                out.push(false);
            }
        }
        let book = codebook();
        for sym in symbols {
            push_ones(&mut out, MARKER_LEN);
            let w = book[sym as usize];
            for k in (0..PAYLOAD_LEN).rev() {
                out.push((w >> k) & 1 == 1);
            }
        }
        push_ones(&mut out, MARKER_LEN);
        debug_assert_eq!(out.len(), self.codeword_len);
        Ok(out)
    }

    /// Returns `None` when too few frames survive or the outer decoder fails.
    pub fn decode(&self, y: &BitString) -> Option<BitString> {
        let bits = y.as_slice();
        let markers = one_runs(bits, MARKER_MIN_RUN);
        let mut slots: Vec<Option<u8>> = vec![None; self.frames];
        let mut conflict = vec![false; self.frames];
        let origin = (self.pad_len + MARKER_LEN) as i64;
        for pair in markers.windows(2) {
            let start = pair[0].1;
            let end = pair[1].0;
            if end - start != PAYLOAD_LEN {
                continue;
            }
            let word = bits[start..end].iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            let Some(sym) = symbol_of(word) else { continue };
            let offset = start as i64 - origin;
            let s = (offset as f64 / FRAME_LEN as f64).round() as i64;
            if s < 0 || s >= self.frames as i64 {
                continue;
            }
            if (offset - s * FRAME_LEN as i64).unsigned_abs() as usize > self.max_edits {
                continue;
            }
            let s = s as usize;
            match slots[s] {
                Some(prev) if prev != sym => conflict[s] = true,
                _ => slots[s] = Some(sym),
            }
        }
        let mut word = Vec::with_capacity(self.frames);
        let mut erasures = Vec::new();
        for s in 0..self.frames {
            match slots[s] {
                Some(v) if !conflict[s] => word.push(v),
                _ => {
                    word.push(0);
                    erasures.push(s);
                }
            }
        }
        let data = self.rs.decode(&mut word, &erasures).ok()?;
        let full = BitString::from_bytes(&data);
        if full.iter().skip(self.t).any(|b| b) {
            return None;
        }
        Some(full.slice(1, self.t).expect("t ≤ 8m"))
    }
}

fn push_ones(out: &mut BitString, n: usize) {
    for _ in 0..n {
        out.push(true);
    }
}

/// Half-open `[start, end)` ranges of maximal runs of ones with length ≥ `min`.
fn one_runs(bits: &[bool], min: usize) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut k = 0;
    while k < bits.len() {
        if bits[k] {
            let start = k;
            while k < bits.len() && bits[k] {
                k += 1;
            }
            if k - start >= min {
                runs.push((start, k));
            }
        } else {
            k += 1;
        }
    }
    runs
}

/// Smallest fractional weight over all windows of length `w` (1 if `w` exceeds the word).
pub fn min_window_density(word: &BitString, w: usize) -> Ratio<u64> {
    if w == 0 || w > word.len() {
        return Ratio::from_integer(1);
    }
    let bits = word.as_slice();
    let mut weight = bits[..w].iter().filter(|&&b| b).count();
    let mut best = weight;
    for k in w..bits.len() {
        weight += bits[k] as usize;
        weight -= bits[k - w] as usize;
        best = best.min(weight);
    }
    Ratio::new(best as u64, w as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::edit_raw;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desk() -> InnerInsDelCode {
        InnerInsDelCode::new(394, Ratio::new(1, 4)).unwrap()
    }

    fn random_edits(rng: &mut ChaCha8Rng, word: &BitString, count: usize) -> BitString {
        let mut y = word.clone();
        for _ in 0..count {
            if rng.gen_bool(0.5) && !y.is_empty() {
                let k = rng.gen_range(0..y.len());
                y.remove(k);
            } else {
                let k = rng.gen_range(0..=y.len());
                y.insert(k, rng.gen());
            }
        }
        y
    }

    #[test]
    fn codebook_words_are_constrained() {
        let book = codebook();
        for (k, &w) in book.iter().enumerate() {
            let s = format!("{w:019b}");
            assert!(s.starts_with('0') && s.ends_with('0'), "{s}");
            assert!(!s.contains("00") && !s.contains("1111"), "{s}");
            assert_eq!(symbol_of(w), Some(k as u8));
        }
        assert!(book.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn desk_instance_shape() {
        let c = desk();
        assert_eq!(c.codeword_len(), 1576);
        assert_eq!(c.frames(), 65);
        assert_eq!(c.pad_len(), 11);
        assert_eq!(c.max_edits(), 7);
        assert_eq!(c.rho_sz(), Ratio::new(7, 3166));
        assert_eq!(c.window_len(), 18);
    }

    #[test]
    fn too_small_messages_rejected() {
        assert!(matches!(InnerInsDelCode::new(8, Ratio::new(1, 4)), Err(Error::TTooSmall(8))));
        assert!(matches!(InnerInsDelCode::new(9, Ratio::new(2, 7)), Err(Error::BadRate(_))));
    }

    #[test]
    fn zero_message_density_and_length() {
        let c = desk();
        let cw = c.encode(&BitString::zeros(394)).unwrap();
        assert_eq!(cw.len(), 1576);
        assert!(min_window_density(&cw, c.window_len()) >= Ratio::new(2, 5));
        assert!(!cw.to_string().contains("00"));
        assert_eq!(c.decode(&cw), Some(BitString::zeros(394)));
    }

    #[test]
    fn pad_parity_both_ways() {
        for t in [100usize, 101, 102, 103] {
            let c = InnerInsDelCode::new(t, Ratio::new(1, 4)).unwrap();
            let m: BitString = (0..t).map(|k| k % 3 == 0).collect();
            let cw = c.encode(&m).unwrap();
            assert_eq!(cw.len(), 4 * t);
            assert!(!cw.to_string().contains("00"));
            assert!(cw[0] && cw[cw.len() - 1]);
            assert_eq!(c.decode(&cw), Some(m));
        }
    }

    #[test]
    fn empty_input_is_bot() {
        assert_eq!(desk().decode(&BitString::new()), None);
    }

    #[test]
    fn deletions_at_radius() {
        let c = desk();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let budget = (c.rho_sz() * Ratio::from_integer(2 * c.codeword_len() as u64)).to_integer() as usize;
        assert_eq!(budget, 6);
        for _ in 0..200 {
            let m: BitString = (0..394).map(|_| rng.gen()).collect();
            let mut y = c.encode(&m).unwrap();
            for _ in 0..budget {
                let k = rng.gen_range(0..y.len());
                y.remove(k);
            }
            assert_eq!(c.decode(&y), Some(m));
        }
    }

    // Every message of an 8-bit instance, every single insertion and deletion.
    #[test]
    fn exhaustive_single_edits_small_instance() {
        let c = InnerInsDelCode::new(8, Ratio::new(1, 10)).unwrap();
        assert_eq!(c.max_edits(), 1);
        for v in 0..256u64 {
            let m = BitString::from_uint(v, 8).unwrap();
            let cw = c.encode(&m).unwrap();
            for k in 0..cw.len() {
                let mut y = cw.clone();
                y.remove(k);
                assert_eq!(c.decode(&y), Some(m.clone()), "msg {v} delete {k}");
            }
            for k in 0..=cw.len() {
                for b in [false, true] {
                    let mut y = cw.clone();
                    y.insert(k, b);
                    assert_eq!(c.decode(&y), Some(m.clone()), "msg {v} insert {b} at {k}");
                }
            }
        }
    }

    #[test]
    fn encodes_t_2048_quickly() {
        let c = InnerInsDelCode::new(2048, Ratio::new(1, 4)).unwrap();
        let m: BitString = (0..2048).map(|k| k % 5 == 1).collect();
        let start = std::time::Instant::now();
        let cw = c.encode(&m).unwrap();
        assert_eq!(c.decode(&cw), Some(m));
        assert!(start.elapsed().as_secs_f64() < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn corrects_any_script_within_radius(seed in any::<u64>()) {
            let c = desk();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m: BitString = (0..394).map(|_| rng.gen()).collect();
            let cw = c.encode(&m).unwrap();
            let count = rng.gen_range(0..=c.max_edits());
            let y = random_edits(&mut rng, &cw, count);
            prop_assert!(edit_raw(&cw, &y) as usize <= c.max_edits());
            prop_assert_eq!(c.decode(&y), Some(m));
        }

        #[test]
        fn density_holds_for_random_messages(seed in any::<u64>()) {
            let c = desk();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m: BitString = (0..394).map(|_| rng.gen()).collect();
            let cw = c.encode(&m).unwrap();
            prop_assert!(min_window_density(&cw, c.window_len()) >= Ratio::new(2, 5));
        }
    }
}
