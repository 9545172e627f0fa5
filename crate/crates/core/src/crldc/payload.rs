use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Field widths of `x ∘ σ ∘ pk ∘ j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayloadLayout {
    pub r: usize,
    pub sig_len: usize,
    pub pk_len: usize,
    pub index_len: usize,
}

impl PayloadLayout {
    pub fn len(&self) -> usize {
        self.r + self.sig_len + self.pk_len + self.index_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index field for 1-based block `j`. The field stores `j - 1` so that
    /// `j = 2^index_len` still fits.
    pub fn index_field(&self, j: usize) -> BitString {
        BitString::from_uint(j as u64 - 1, self.index_len).expect("block index fits its field")
    }

    /// The message that block `j` signs: `x ∘ index_field(j)`.
    pub fn signed_message(&self, x_block: &BitString, j: usize) -> BitString {
        x_block.concat(&self.index_field(j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedBlockPayload {
    pub x_block: BitString,
    pub sigma: BitString,
    pub pk: BitString,
    /// 1-based block index as stored.
    pub index: usize,
}

impl SignedBlockPayload {
    pub fn serialize(&self, layout: &PayloadLayout) -> BitString {
        let mut out = BitString::with_capacity(layout.len());
        out.extend_from(&self.x_block);
        out.extend_from(&self.sigma);
        out.extend_from(&self.pk);
        out.extend_from(&layout.index_field(self.index));
        out
    }

    pub fn parse(bits: &BitString, layout: &PayloadLayout) -> Result<Self> {
        if bits.len() != layout.len() {
            return Err(Error::LengthMismatch { expected: layout.len(), got: bits.len() });
        }
        let PayloadLayout { r, sig_len, pk_len, index_len } = *layout;
        let cut = |a: usize, len: usize| bits.slice(a, a + len - 1).expect("within payload");
        let x_block = cut(1, r);
        let sigma = cut(r + 1, sig_len);
        let pk = cut(r + sig_len + 1, pk_len);
        let index = if index_len == 0 { 1 } else { cut(r + sig_len + pk_len + 1, index_len).to_uint() as usize + 1 };
        Ok(Self { x_block, sigma, pk, index })
    }
}
