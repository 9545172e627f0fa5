//! Bit-level wrapper around an interleaved RS code, used as the inner code
//! against bit flips.

use num_rational::Ratio;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rs::InterleavedRs;

/// `t` message bits become `t/β_in` codeword bits: `8n` bits of RS symbols
/// followed by zero padding up to the declared length.
#[derive(Clone, Debug)]
pub struct InnerHammingCode {
    t: usize,
    beta_in: Ratio<u64>,
    codeword_len: usize,
    rs: InterleavedRs,
}

impl InnerHammingCode {
    pub fn new(t: usize, beta_in: Ratio<u64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::TTooSmall(t));
        }
        if beta_in <= Ratio::from_integer(0) || beta_in > Ratio::from_integer(1) {
            return Err(Error::BadRate(format!("β_in = {beta_in} is not in (0, 1]")));
        }
        let len = Ratio::from_integer(t as u64) / beta_in;
        if !len.is_integer() {
            return Err(Error::BadRate(format!("{t} / {beta_in} = {len}")));
        }
        let codeword_len = len.to_integer() as usize;
        let n = codeword_len / 8;
        let m = t.div_ceil(8);
        if n < m + 2 {
            return Err(Error::TTooSmall(t));
        }
        let rs = InterleavedRs::new(n, m).map_err(|e| Error::ParamMismatch(e.to_string()))?;
        Ok(Self { t, beta_in, codeword_len, rs })
    }

    pub fn message_len(&self) -> usize {
        self.t
    }

    pub fn codeword_len(&self) -> usize {
        self.codeword_len
    }

    pub fn beta_in(&self) -> Ratio<u64> {
        self.beta_in
    }

    /// RS symbols (bytes) in the codeword; the first `data_symbols` are systematic.
    pub fn symbols(&self) -> usize {
        self.rs.n()
    }

    pub fn data_symbols(&self) -> usize {
        self.rs.k()
    }

    /// Symbol `s` belongs to interleaved component `s % depth`.
    pub fn depth(&self) -> usize {
        self.rs.depth()
    }

    /// Bit flips always corrected.
    pub fn radius(&self) -> usize {
        self.rs.radius()
    }

    /// Normalized unique-decoding radius `radius / codeword_len`.
    pub fn rho_in(&self) -> Ratio<u64> {
        Ratio::new(self.radius() as u64, self.codeword_len as u64)
    }

    pub fn encode(&self, m: &BitString) -> Result<BitString> {
        if m.len() != self.t {
            return Err(Error::LengthMismatch { expected: self.t, got: m.len() });
        }
        let cw = self.rs.encode(&m.to_bytes()).expect("message length checked");
        let mut out = BitString::from_bytes(&cw);
        out.extend_from(&BitString::zeros(self.codeword_len - out.len()));
        Ok(out)
    }

    /// Outside the radius this returns the systematic part as a best guess.
    pub fn decode(&self, y: &BitString) -> Result<BitString> {
        if y.len() != self.codeword_len {
            return Err(Error::LengthMismatch { expected: self.codeword_len, got: y.len() });
        }
        let mut word = y.slice(1, 8 * self.rs.n()).expect("length checked").to_bytes();
        let data = match self.rs.decode(&mut word, &[]) {
            Ok(d) => d,
            Err(_) => word[..self.rs.k()].to_vec(),
        };
        Ok(BitString::from_bytes_len(&data, self.t).expect("k bytes hold t bits"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn desk_instance_shape() {
        let c = InnerHammingCode::new(387, Ratio::new(1, 4)).unwrap();
        assert_eq!(c.codeword_len(), 1548);
        assert_eq!(c.radius(), 72);
        assert_eq!(c.rho_in(), Ratio::new(72, 1548));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(InnerHammingCode::new(10, Ratio::new(3, 7)), Err(Error::BadRate(_))));
        assert!(matches!(InnerHammingCode::new(8, Ratio::new(1, 1)), Err(Error::TTooSmall(8))));
        let c = InnerHammingCode::new(8, Ratio::new(1, 4)).unwrap();
        assert!(c.encode(&BitString::zeros(7)).is_err());
        assert!(c.decode(&BitString::zeros(31)).is_err());
    }

    #[test]
    fn zero_message() {
        let c = InnerHammingCode::new(387, Ratio::new(1, 4)).unwrap();
        let z = BitString::zeros(387);
        assert_eq!(c.decode(&c.encode(&z).unwrap()).unwrap(), z);
    }

    // All 2^8 messages against every error pattern of weight ≤ radius.
    #[test]
    fn exhaustive_small_instance() {
        let c = InnerHammingCode::new(8, Ratio::new(1, 4)).unwrap();
        assert_eq!(c.codeword_len(), 32);
        assert_eq!(c.radius(), 1);
        for v in 0..256u64 {
            let m = BitString::from_uint(v, 8).unwrap();
            let cw = c.encode(&m).unwrap();
            assert_eq!(c.decode(&cw).unwrap(), m);
            for k in 0..32 {
                let mut y = cw.clone();
                y.flip(k);
                assert_eq!(c.decode(&y).unwrap(), m, "msg {v} flip {k}");
            }
        }
    }

    #[test]
    fn exact_radius_flips() {
        let c = InnerHammingCode::new(387, Ratio::new(1, 4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let flips = (c.rho_in() * Ratio::from_integer(c.codeword_len() as u64)).to_integer() as usize;
        assert_eq!(flips, 72);
        for _ in 0..500 {
            let m: BitString = (0..387).map(|_| rng.gen()).collect();
            let mut y = c.encode(&m).unwrap();
            let w = rng.gen_range(0..=flips);
            for k in sample(&mut rng, y.len(), w) {
                y.flip(k);
            }
            assert_eq!(c.decode(&y).unwrap(), m);
        }
    }

    proptest! {
        #[test]
        fn round_trip(t in 8usize..200, bits in prop::collection::vec(any::<bool>(), 200)) {
            let c = InnerHammingCode::new(t, Ratio::new(1, 4)).unwrap();
            let m = BitString::from_bools(bits[..t].to_vec());
            let cw = c.encode(&m).unwrap();
            prop_assert_eq!(cw.len(), 4 * t);
            prop_assert_eq!(c.decode(&cw).unwrap(), m);
        }
    }
}
