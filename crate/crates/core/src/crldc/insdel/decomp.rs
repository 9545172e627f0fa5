//! Test-side oracle: the block decomposition of a received word that minimizes
//! the summed per-block edit distance, and the γ-good classification on top of it.

use num_rational::{BigRational, Ratio};
use rayon::prelude::*;
use serde::Serialize;

use super::InsDelParams;
use crate::bits::BitString;
use crate::distance::edit_raw;
use crate::error::{Error, Result};
use crate::util::{big, big_f64, big_int, ratio_str};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDecomposition {
    pub block_len: usize,
    /// Inclusive 1-based interval of the received word per block; empty as `(s, s - 1)`.
    pub intervals: Vec<(usize, usize)>,
    pub per_block_raw: Vec<u64>,
    /// `raw / (2·max(|interval|, block_len))`.
    pub per_block_ed: Vec<f64>,
    /// Raw edit distance between the full words.
    pub total_raw: u64,
}

impl BlockDecomposition {
    pub fn interval_len(&self, j: usize) -> usize {
        let (s, e) = self.intervals[j - 1];
        e + 1 - s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaGoodReport {
    #[serde(serialize_with = "ratio_str::serialize")]
    pub gamma: Ratio<u64>,
    /// 1-based.
    pub good_indices: Vec<usize>,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub bad_fraction: Ratio<u64>,
    /// `(j, |φ⁻¹(j)|)` for every good block.
    pub interval_lengths: Vec<(usize, usize)>,
}

const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

/// Optimal decomposition of `c_tilde` against `c` split into `d` equal blocks.
///
/// Cuts an optimal global alignment at the block boundaries of `c`; since a
/// concatenation of per-block alignments is a global alignment, no other
/// decomposition has a smaller sum.
pub fn optimal_block_decomposition(c: &BitString, c_tilde: &BitString, d: usize) -> Result<BlockDecomposition> {
    if d == 0 || c.len() % d != 0 {
        return Err(Error::ParamMismatch(format!("{} bits do not split into {d} equal blocks", c.len())));
    }
    let bl = c.len() / d;
    let (n, m) = (c.len(), c_tilde.len());
    let total = edit_raw(c, c_tilde);
    let band = total as usize;
    let width = 2 * band + 1;
    let (u, v) = (c.as_slice(), c_tilde.as_slice());
    // Row i holds columns j ∈ [i - band, i + band]; slot = j + band - i.
    let inf = u32::MAX / 2;
    let mut prev = vec![inf; width];
    let mut cur = vec![inf; width];
    let mut dir = vec![DIAG; (n + 1) * width];
    for j in 0..=band.min(m) {
        prev[j + band] = j as u32;
        dir[j + band] = LEFT;
    }
    for i in 1..=n {
        cur.fill(inf);
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(m);
        for j in lo..=hi {
            let slot = j + band - i;
            let mut best = inf;
            let mut how = DIAG;
            if j >= 1 && u[i - 1] == v[j - 1] {
                // Same slot in the previous row.
                best = prev[slot];
            }
            // (i-1, j) sits one slot to the right in the previous row.
            if slot + 1 < width && prev[slot + 1] + 1 < best {
                best = prev[slot + 1] + 1;
                how = UP;
            }
            if j >= 1 && slot >= 1 && cur[slot - 1] + 1 < best {
                best = cur[slot - 1] + 1;
                how = LEFT;
            }
            cur[slot] = best;
            dir[i * width + slot] = how;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    debug_assert_eq!(prev[m + band - n] as u64, total);

    let mut cuts = vec![0usize; d + 1];
    cuts[d] = m;
    let (mut i, mut j) = (n, m);
    let mut next_cut = d - 1;
    while i > 0 || j > 0 {
        if next_cut > 0 && i == next_cut * bl {
            cuts[next_cut] = j;
            next_cut -= 1;
            continue;
        }
        match dir[i * width + j + band - i] {
            DIAG => {
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
    }
    while next_cut > 0 {
        cuts[next_cut] = 0;
        next_cut -= 1;
    }

    let intervals: Vec<(usize, usize)> = (1..=d).map(|b| (cuts[b - 1] + 1, cuts[b])).collect();
    let per_block_raw: Vec<u64> = intervals
        .par_iter()
        .enumerate()
        .map(|(b, &(s, e))| {
            let block = c.slice(b * bl + 1, (b + 1) * bl).expect("block within codeword");
            let seg = if e >= s { c_tilde.slice(s, e).expect("interval within word") } else { BitString::new() };
            edit_raw(&block, &seg)
        })
        .collect();
    let per_block_ed = intervals
        .iter()
        .zip(&per_block_raw)
        .map(|(&(s, e), &raw)| raw as f64 / (2 * (e + 1 - s).max(bl)) as f64)
        .collect();
    Ok(BlockDecomposition { block_len: bl, intervals, per_block_raw, per_block_ed, total_raw: total })
}

/// Blocks whose normalized edit distance is at most `gamma`, decided exactly.
pub fn classify_gamma_good(decomp: &BlockDecomposition, gamma: Ratio<u64>) -> GammaGoodReport {
    let d = decomp.intervals.len();
    let good_indices: Vec<usize> = (1..=d)
        .filter(|&j| {
            let denom = 2 * decomp.interval_len(j).max(decomp.block_len) as u64;
            Ratio::new(decomp.per_block_raw[j - 1], denom) <= gamma
        })
        .collect();
    let interval_lengths = good_indices.iter().map(|&j| (j, decomp.interval_len(j))).collect();
    GammaGoodReport {
        gamma,
        bad_fraction: Ratio::new((d - good_indices.len()) as u64, d.max(1) as u64),
        good_indices,
        interval_lengths,
    }
}

/// Both bounds on γ-good blocks checked against a report.
#[derive(Clone, Debug, Serialize)]
pub struct GammaBoundCheck {
    pub bad_fraction: f64,
    pub bad_fraction_bound: f64,
    pub length_lo: f64,
    pub length_hi: f64,
    /// Good blocks whose interval length falls outside `[length_lo, length_hi]`.
    pub length_violations: Vec<usize>,
}

impl GammaBoundCheck {
    pub fn holds(&self) -> bool {
        self.bad_fraction <= self.bad_fraction_bound && self.length_violations.is_empty()
    }
}

/// Checks the bad-fraction bound at error rate `rho` and the interval-length
/// window `[(β − αγ)τ, (β + αγ)τ]`. α and β are taken as realized by the
/// block layout (`buffer_len/τ` and `block_len/τ`), which makes the window
/// contain the actual block length.
pub fn check_gamma_bounds(report: &GammaGoodReport, params: &InsDelParams, rho: &BigRational) -> GammaBoundCheck {
    let tau = big_int(params.tau as i64);
    let alpha = big_int(params.buffer_len as i64) / &tau;
    let beta = big_int(params.block_len as i64) / &tau;
    let slack = &alpha * &params.gamma * &tau;
    let lo = &beta * &tau - &slack;
    let hi = &beta * &tau + &slack;
    let length_violations = report
        .interval_lengths
        .iter()
        .filter(|&&(_, len)| {
            let len = big_int(len as i64);
            len < lo || len > hi
        })
        .map(|&(j, _)| j)
        .collect();
    GammaBoundCheck {
        bad_fraction: big_f64(&big(report.bad_fraction)),
        bad_fraction_bound: big_f64(&params.bad_fraction_bound(rho)),
        length_lo: big_f64(&lo),
        length_hi: big_f64(&hi),
        length_violations,
    }
}
