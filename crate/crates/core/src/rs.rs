//! Systematic Reed–Solomon codes over GF(256) with errors-and-erasures decoding.
//!
//! Symbol `j` of an `n`-symbol codeword is the coefficient of `x^(n-1-j)`;
//! the generator has roots α^0 … α^(n-k-1).

use thiserror::Error;

use crate::gf256::{self, alpha_pow, mul, poly_eval, poly_mul};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RsError {
    #[error("invalid code shape n={n}, k={k}")]
    BadShape { n: usize, k: usize },
    #[error("expected {expected} symbols, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("too many errors or erasures")]
    Uncorrectable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReedSolomon {
    n: usize,
    k: usize,
    /// Generator, highest degree first, monic.
    generator: Vec<u8>,
}

impl ReedSolomon {
    pub fn new(n: usize, k: usize) -> Result<Self, RsError> {
        if n == 0 || n > 255 || k > n {
            return Err(RsError::BadShape { n, k });
        }
        let mut g = vec![1u8];
        for i in 0..(n - k) {
            g = poly_mul(&g, &[alpha_pow(i as i64), 1]);
        }
        g.reverse();
        Ok(Self { n, k, generator: g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity(&self) -> usize {
        self.n - self.k
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>, RsError> {
        if msg.len() != self.k {
            return Err(RsError::BadLength { expected: self.k, got: msg.len() });
        }
        let nsym = self.parity();
        let mut buf = msg.to_vec();
        buf.resize(self.n, 0);
        // Synthetic division by the monic generator.
        for i in 0..self.k {
            let coef = buf[i];
            if coef != 0 {
                for j in 1..=nsym {
                    buf[i + j] ^= mul(self.generator[j], coef);
                }
            }
        }
        buf[..self.k].copy_from_slice(msg);
        Ok(buf)
    }

    fn syndromes(&self, word: &[u8]) -> Vec<u8> {
        (0..self.parity())
            .map(|i| {
                let x = alpha_pow(i as i64);
                word.iter().fold(0u8, |acc, &c| mul(acc, x) ^ c)
            })
            .collect()
    }

    /// Corrects `word` in place. `erasures` are symbol indices whose values are unknown.
    /// Succeeds whenever `2·errors + erasures ≤ n - k`.
    pub fn decode(&self, word: &mut [u8], erasures: &[usize]) -> Result<(), RsError> {
        if word.len() != self.n {
            return Err(RsError::BadLength { expected: self.n, got: word.len() });
        }
        let nsym = self.parity();
        let mut erasures: Vec<usize> = erasures.to_vec();
        erasures.sort_unstable();
        erasures.dedup();
        if erasures.len() > nsym || erasures.iter().any(|&e| e >= self.n) {
            return Err(RsError::Uncorrectable);
        }
        let synd = self.syndromes(word);
        if synd.iter().all(|&s| s == 0) {
            return Ok(());
        }

        let degree_of = |j: usize| (self.n - 1 - j) as i64;

        // Erasure locator Γ(x) = ∏ (1 + X_k x), low degree first.
        let mut gamma = vec![1u8];
        for &e in &erasures {
            gamma = poly_mul(&gamma, &[1, alpha_pow(degree_of(e))]);
        }

        // Forney syndromes: coefficients ν.. of Γ(x)S(x) mod x^nsym.
        let nu = erasures.len();
        let mut t = poly_mul(&gamma, &synd);
        t.truncate(nsym);
        let seq = &t[nu..];

        let lambda = berlekamp_massey(seq);
        let l = lambda.len() - 1;
        if 2 * l > seq.len() {
            return Err(RsError::Uncorrectable);
        }

        let psi = poly_mul(&lambda, &gamma);
        let psi_deg = psi.len() - 1;

        let mut positions = Vec::with_capacity(psi_deg);
        for j in 0..self.n {
            if poly_eval(&psi, alpha_pow(-degree_of(j))) == 0 {
                positions.push(j);
            }
        }
        if positions.len() != psi_deg {
            return Err(RsError::Uncorrectable);
        }

        let mut omega = poly_mul(&synd, &psi);
        omega.truncate(nsym);
        let dpsi: Vec<u8> = (1..psi.len()).map(|i| if i % 2 == 1 { psi[i] } else { 0 }).collect();

        for &j in &positions {
            let x = alpha_pow(degree_of(j));
            let x_inv = gf256::inv(x);
            let den = poly_eval(&dpsi, x_inv);
            if den == 0 {
                return Err(RsError::Uncorrectable);
            }
            let y = mul(x, gf256::div(poly_eval(&omega, x_inv), den));
            word[j] ^= y;
        }

        if self.syndromes(word).iter().any(|&s| s != 0) {
            return Err(RsError::Uncorrectable);
        }
        Ok(())
    }
}

/// Shortest LFSR (connection polynomial, low degree first, constant term 1) generating `s`.
fn berlekamp_massey(s: &[u8]) -> Vec<u8> {
    let mut c = vec![1u8];
    let mut b = vec![1u8];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last = 1u8;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d ^= mul(c[i], s[n - i]);
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = gf256::div(d, last);
        let mut next = c.clone();
        if next.len() < b.len() + m {
            next.resize(b.len() + m, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + m] ^= mul(coef, bi);
        }
        if 2 * l <= n {
            b = c;
            l = n + 1 - l;
            last = d;
            m = 1;
        } else {
            m += 1;
        }
        c = next;
    }
    c.truncate(l + 1);
    c.resize(l + 1, 0);
    c
}

/// Several RS codewords interleaved symbol by symbol so that `n` may exceed 255.
///
/// Symbol `s` belongs to component `s % depth` at offset `s / depth`. The first
/// `k` symbols of the interleaved word are the message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterleavedRs {
    n: usize,
    k: usize,
    parts: Vec<ReedSolomon>,
}

impl InterleavedRs {
    pub fn new(n: usize, k: usize) -> Result<Self, RsError> {
        if n == 0 || k > n {
            return Err(RsError::BadShape { n, k });
        }
        let depth = n.div_ceil(255);
        let count = |total: usize, c: usize| (total + depth - 1 - c) / depth;
        let parts = (0..depth)
            .map(|c| ReedSolomon::new(count(n, c), count(k, c)))
            .collect::<Result<_, _>>()?;
        Ok(Self { n, k, parts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    /// Smallest parity count over the components.
    pub fn min_parity(&self) -> usize {
        self.parts.iter().map(ReedSolomon::parity).min().unwrap_or(0)
    }

    /// Number of symbol errors always corrected without erasures.
    pub fn radius(&self) -> usize {
        self.min_parity() / 2
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>, RsError> {
        if msg.len() != self.k {
            return Err(RsError::BadLength { expected: self.k, got: msg.len() });
        }
        let depth = self.depth();
        let mut out = vec![0u8; self.n];
        for (c, part) in self.parts.iter().enumerate() {
            let sub: Vec<u8> = msg.iter().skip(c).step_by(depth).copied().collect();
            let cw = part.encode(&sub)?;
            for (off, sym) in cw.into_iter().enumerate() {
                out[c + off * depth] = sym;
            }
        }
        Ok(out)
    }

    /// Corrects in place and returns the message symbols.
    pub fn decode(&self, word: &mut [u8], erasures: &[usize]) -> Result<Vec<u8>, RsError> {
        if word.len() != self.n {
            return Err(RsError::BadLength { expected: self.n, got: word.len() });
        }
        let depth = self.depth();
        for (c, part) in self.parts.iter().enumerate() {
            let mut sub: Vec<u8> = word.iter().skip(c).step_by(depth).copied().collect();
            let er: Vec<usize> = erasures.iter().filter(|&&e| e % depth == c).map(|&e| e / depth).collect();
            part.decode(&mut sub, &er)?;
            for (off, sym) in sub.into_iter().enumerate() {
                word[c + off * depth] = sym;
            }
        }
        Ok(word[..self.k].to_vec())
    }
}
