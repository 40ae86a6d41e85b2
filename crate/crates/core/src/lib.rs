//! Quasi-cyclic LDPC erasure codes whose parity-check matrices permute into
//! pseudo-band form, with a hybrid peeling / Gaussian-elimination decoder
//! whose elimination cost follows the band width, plus a simulation harness
//! for the resulting error rates and costs.

pub mod band;
pub mod codec;
pub mod error;
pub mod gf2;
pub mod qc;
pub mod sim;

pub use error::{Error, Result};
