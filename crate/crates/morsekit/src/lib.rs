//! Synthetic Morse-code classification datasets of tunable difficulty,
//! closed-form separability metrics, and a small dense/sparse MLP to
//! relate difficulty to achievable accuracy.
//!
//! Everything is deterministic: datasets, masks, weight init and epoch
//! shuffles all derive from explicit seeds through keyed RNG substreams,
//! so results are reproducible across runs and thread counts. The
//! `parallel` feature (on by default) fans data-parallel loops out over
//! rayon; disabling it gives a dependency-free sequential build with the
//! same observable behavior.

pub mod codebook;
pub mod error;
pub mod experiment;
pub mod generator;
pub mod io;
pub mod metrics;
pub mod mlp;
pub mod rng;

pub use error::{Error, Result};
