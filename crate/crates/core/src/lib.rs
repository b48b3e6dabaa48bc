pub mod bits;
pub mod codes;
pub mod complexity;
pub mod demon;
pub mod error;
pub mod fingerprint;
pub mod kcl;
pub mod quantum;
pub mod rng;
pub mod shannon;
pub mod smp;

pub use bits::BitString;
pub use error::{Error, Result};
