//! Query-counted access to a received word.

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Wraps a received word. Every read is counted; reads past the end return `None`.
///
/// Decoders only ever see the word through this type, so `queries()` is the
/// locality actually spent.
#[derive(Debug)]
pub struct ReceivedWordOracle<'a> {
    word: &'a BitString,
    queries: u64,
    log: Option<Vec<usize>>,
}

impl<'a> ReceivedWordOracle<'a> {
    pub fn new(word: &'a BitString) -> Self {
        Self { word, queries: 0, log: None }
    }

    /// Like [`ReceivedWordOracle::new`] but also records every queried position.
    pub fn with_log(word: &'a BitString) -> Self {
        Self { word, queries: 0, log: Some(Vec::new()) }
    }

    /// Length of the received word. Knowing it costs no queries.
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Reads 1-indexed position `i`.
    pub fn query(&mut self, i: usize) -> Option<bool> {
        self.queries += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(i);
        }
        if i == 0 || i > self.word.len() {
            None
        } else {
            Some(self.word[i - 1])
        }
    }

    /// Reads the inclusive 1-indexed range `[a, b]`; positions past the end read as 0.
    pub fn query_range(&mut self, a: usize, b: usize) -> BitString {
        (a..=b).map(|i| self.query(i).unwrap_or(false)).collect()
    }

    /// Strict read of the inclusive range `[a, b]`; every position must exist.
    pub fn read(&mut self, a: usize, b: usize) -> Result<BitString> {
        if a == 0 || b > self.word.len() || a > b {
            let index = if a == 0 { a } else { b };
            return Err(Error::IndexOutOfRange { index, max: self.word.len() });
        }
        Ok(self.query_range(a, b))
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn log(&self) -> Option<&[usize]> {
        self.log.as_deref()
    }
}
