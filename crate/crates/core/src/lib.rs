//! Duplicate question-pair detection.
//!
//! Three model families share one preprocessing pipeline:
//!
//! * [`gbt`]: second-order gradient tree boosting over the 42 hand-crafted
//!   pair features of [`features`];
//! * [`net`]: a Siamese network (shared encoder, exp(-|r1 - r2|) or
//!   concatenation aggregation, dense decision head) trained with Nadam;
//! * [`transfer`]: per-module parameter transfer between Siamese networks
//!   trained on different forums.
//!
//! [`eval`] scores everything with the rank-based AUC.

pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod features;
pub mod gbt;
pub mod net;
pub mod rng;
pub mod synth;
pub mod transfer;

pub use error::{Error, Result};

/// Seventeen significant digits: enough for every `f64` to read back
/// bit-identically.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}
