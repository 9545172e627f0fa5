//! Non-local inner codes applied to each signed block.

pub mod hamming;
pub mod insdel;

pub use hamming::InnerHammingCode;
pub use insdel::InnerInsDelCode;
