pub mod adversary;
pub mod bits;
pub mod crldc;
pub mod distance;
pub mod error;
pub mod gf256;
pub mod harness;
pub mod inner;
pub mod oracle;
pub mod rs;
pub mod sig;
pub mod util;

pub use bits::BitString;
pub use error::{Error, Result};
pub use oracle::ReceivedWordOracle;
