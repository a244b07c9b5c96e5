//! Universal discrete denoising under a known discrete memoryless channel.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! pieces: the channel algebra behind the unbiased estimated loss, the set of
//! single-symbol denoisers, context extraction, the count-based DUDE, the
//! Neural DUDE network and its trainer, the loss functionals, and numeric
//! evaluators for the concentration and denoising-loss bounds.
//!
//! File formats, experiment sweeps and the command line live in the
//! `dude-harness` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod channel;
pub mod context;
pub mod dude;
mod error;
pub mod linalg;
pub mod mappings;
pub mod metrics;
pub mod ndude;
mod problem;
pub mod rng;

pub use channel::{Channel, LossTables};
pub use context::{ContextShape, ContextSpec, EncodedContext, Grid, Padding, Signal};
pub use error::Error;
pub use linalg::Matrix;
pub use mappings::MappingSet;
pub use metrics::{Denoised, LossReport};
pub use problem::Problem;

/// A symbol of any of the clean, noisy or reconstruction alphabets.
///
/// Alphabets are limited to [`MAX_ALPHABET`] letters so that context keys can
/// reserve one byte value for padding.
pub type Symbol = u8;

/// Largest supported alphabet size.
pub const MAX_ALPHABET: usize = 255;

pub type Result<T, E = Error> = core::result::Result<T, E>;
