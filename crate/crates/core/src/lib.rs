//! Desk-scale toolkit for studying how audio watermarking interacts with
//! spoofing countermeasures: watermark codecs behind a uniform embed/detect
//! interface, deterministic ratio-controlled corpus construction, EER and
//! relative-degradation evaluation, and a small knowledge-preserving
//! adaptation trainer with hand-verified gradients.
//!
//! Everything is deterministic under explicit seeds; there is no hidden
//! global randomness anywhere in the crate.

pub mod audio;
pub mod codec;
// pub mod corpus;
pub mod error;
// pub mod eval;
// pub mod kpwl;
pub(crate) mod rng;

pub use error::{Error, Result};
