//! Experiments around pseudorandom codes in the secret random oracle model:
//! bit strings and the binary symmetric channel, Boolean Fourier analysis,
//! finite information theory, simulated random oracles, a PRF-based PRC, and
//! the heavy-query compiler that removes the oracle.

pub mod bits;
pub mod boolean;
pub mod channel;
pub mod compiler;
pub mod error;
pub mod info;
pub mod oracle;
pub mod prc;
pub mod prf_prc;
pub mod seed;
pub mod stats;
pub mod toy;

pub use bits::BitString;
pub use channel::{apply_noise, NoiseParameter};
pub use error::{PrcError, Result};
pub use oracle::{LazyOracle, Oracle, QuerySet};
pub use prc::{PrcScheme, SecretKey, Verdict};
pub use seed::Seed;
