//! Hamming and insertion/deletion distances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistanceError {
    #[error("hamming distance needs equal lengths, got {0} and {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Hamming,
    Insdel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub metric: Metric,
    pub raw: u64,
    pub normalized: f64,
}

pub fn hamming_raw(u: &BitString, v: &BitString) -> Result<u64, DistanceError> {
    if u.len() != v.len() {
        return Err(DistanceError::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.iter().zip(v.iter()).filter(|(a, b)| a != b).count() as u64)
}

pub fn hamming(u: &BitString, v: &BitString) -> Result<DistanceReport, DistanceError> {
    let raw = hamming_raw(u, v)?;
    let normalized = if u.is_empty() { 0.0 } else { raw as f64 / u.len() as f64 };
    Ok(DistanceReport { metric: Metric::Hamming, raw, normalized })
}

/// Length of a longest common subsequence.
///
/// Bit-parallel over the shorter string: O(⌈min/64⌉ · max) word operations.
pub fn lcs_len(u: &BitString, v: &BitString) -> usize {
    let (a, b) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let words = m.div_ceil(64);
    let ones = a.to_words_lsb();
    let zeros: Vec<u64> = ones.iter().map(|w| !w).collect();
    let mut row = vec![u64::MAX; words];
    let tail = m % 64;
    if tail != 0 {
        row[words - 1] = (1u64 << tail) - 1;
    }
    for bit in b.iter() {
        let mask = if bit { &ones } else { &zeros };
        let mut carry = 0u64;
        for w in 0..words {
            let x = row[w];
            let u = x & mask[w];
            let (s1, c1) = x.overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = (c1 | c2) as u64;
            row[w] = s2 | (x & !mask[w]);
        }
        if tail != 0 {
            row[words - 1] &= (1u64 << tail) - 1;
        }
    }
    let set: usize = row.iter().map(|w| w.count_ones() as usize).sum();
    m - set
}

/// Minimum number of single-bit insertions and deletions turning `u` into `v`.
pub fn edit_raw(u: &BitString, v: &BitString) -> u64 {
    (u.len() + v.len() - 2 * lcs_len(u, v)) as u64
}

/// Insertion/deletion distance normalized by `2 · max(|u|, |v|)`.
pub fn edit(u: &BitString, v: &BitString) -> DistanceReport {
    let raw = edit_raw(u, v);
    let denom = 2 * u.len().max(v.len());
    let normalized = if denom == 0 { 0.0 } else { raw as f64 / denom as f64 };
    DistanceReport { metric: Metric::Insdel, raw, normalized }
}

pub fn distance(u: &BitString, v: &BitString, metric: Metric) -> Result<DistanceReport, DistanceError> {
    match metric {
        Metric::Hamming => hamming(u, v),
        Metric::Insdel => Ok(edit(u, v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Quadratic reference DP over insertions and deletions only.
    fn ed_dp(u: &[bool], v: &[bool]) -> u64 {
        let mut prev: Vec<u64> = (0..=v.len() as u64).collect();
        for (i, &a) in u.iter().enumerate() {
            let mut cur = vec![i as u64 + 1; v.len() + 1];
            for (j, &b) in v.iter().enumerate() {
                cur[j + 1] = if a == b { prev[j] } else { 1 + prev[j + 1].min(cur[j]) };
            }
            prev = cur;
        }
        prev[v.len()]
    }

    // LCS by enumerating every subsequence of the shorter string.
    fn lcs_brute(u: &[bool], v: &[bool]) -> usize {
        let (a, b) = if u.len() <= v.len() { (u, v) } else { (v, u) };
        let is_subseq = |s: &[bool]| {
            let mut it = b.iter();
            s.iter().all(|x| it.any(|y| y == x))
        };
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let s: Vec<bool> = (0..a.len()).filter(|k| mask >> k & 1 == 1).map(|k| a[k]).collect();
            if s.len() > best && is_subseq(&s) {
                best = s.len();
            }
        }
        best
    }

    fn bits(max: usize) -> impl Strategy<Value = BitString> {
        prop::collection::vec(any::<bool>(), 0..=max).prop_map(BitString::from_bools)
    }

    #[test]
    fn known_values() {
        let u = BitString::parse("0101").unwrap();
        let v = BitString::parse("1010").unwrap();
        assert_eq!(edit_raw(&u, &v), 2);
        assert_eq!(hamming_raw(&u, &v).unwrap(), 4);
        let e = edit(&u, &v);
        assert_eq!(e.normalized, 0.25);
        assert!(hamming(&u, &BitString::zeros(3)).is_err());
        assert_eq!(edit(&BitString::new(), &BitString::new()).normalized, 0.0);
        let w = BitString::parse("01011").unwrap();
        assert_eq!(edit_raw(&u, &w), 1);
        assert_eq!(edit(&u, &w).normalized, 0.1);
    }

    #[test]
    fn long_strings_cross_word_boundaries() {
        let u: BitString = (0..300).map(|k| (k * 7 + k / 3) % 5 < 2).collect();
        let v: BitString = (0..257).map(|k| (k * 11 + 1) % 3 == 0).collect();
        assert_eq!(edit_raw(&u, &v), ed_dp(u.as_slice(), v.as_slice()));
    }

    proptest! {
        #[test]
        fn lcs_matches_brute_force(u in bits(12), v in bits(14)) {
            prop_assert_eq!(lcs_len(&u, &v), lcs_brute(u.as_slice(), v.as_slice()));
        }

        #[test]
        fn edit_matches_dp(u in bits(200), v in bits(200)) {
            prop_assert_eq!(edit_raw(&u, &v), ed_dp(u.as_slice(), v.as_slice()));
        }

        #[test]
        fn edit_is_a_metric(u in bits(40), v in bits(40), w in bits(40)) {
            let uv = edit_raw(&u, &v);
            prop_assert_eq!(uv, edit_raw(&v, &u));
            prop_assert_eq!(uv == 0, u == v);
            prop_assert!(uv <= edit_raw(&u, &w) + edit_raw(&w, &v));
        }

        #[test]
        fn edit_at_most_twice_hamming(pair in (0usize..64).prop_flat_map(|n| (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        ))) {
            let u = BitString::from_bools(pair.0);
            let v = BitString::from_bools(pair.1);
            prop_assert!(edit_raw(&u, &v) <= 2 * hamming_raw(&u, &v).unwrap());
        }
    }
}
