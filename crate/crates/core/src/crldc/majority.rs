use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Majority {
    pub value: Option<BitString>,
    /// Several values shared the top count.
    pub tie: bool,
}

/// Most frequent non-⊥ value, ties going to the lexicographically smallest.
/// ⊥ wins only when it is strictly more frequent than every value.
pub fn majority(values: &[Option<BitString>]) -> Result<Majority> {
    if values.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut counts: BTreeMap<&BitString, usize> = BTreeMap::new();
    let mut bots = 0;
    for v in values {
        match v {
            Some(b) => *counts.entry(b).or_insert(0) += 1,
            None => bots += 1,
        }
    }
    let top = counts.values().copied().max().unwrap_or(0);
    // BTreeMap iterates in ascending order, so the first hit is the smallest.
    let best = counts.iter().find(|(_, &c)| c == top).map(|(b, _)| (*b).clone());
    let tie = counts.values().filter(|&&c| c == top).count() > 1;
    if bots > top {
        return Ok(Majority { value: None, tie: false });
    }
    Ok(Majority { value: best, tie })
}
