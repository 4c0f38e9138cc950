//! Graph feature filtering and node classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: CSR graphs, symmetric normalization and sparse propagation.
//! - [`numeric`]: minimum-norm least squares and a multinomial logistic
//!   regression classifier.
//! - [`filters`]: the fixed low-pass SGC filter, the adaptive per-feature
//!   ASGC filter and convex blending of raw/SGC/ASGC features.
//! - [`synthetic`]: two-block stochastic block model denoising harness.
//! - [`data`]: dataset files, manifests, splits and the homophily statistic.
//! - [`experiments`]: combination search, trial protocol, K-sweeps and
//!   proportional-accuracy aggregation.

pub mod data;
mod error;
pub mod experiments;
pub mod filters;
pub mod graph;
mod matrix;
pub mod numeric;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
pub use matrix::FeatureMatrix;

/// Number of hops used by both filters unless overridden.
pub const DEFAULT_K_HOPS: usize = 6;

/// Resolution of the convex-combination simplex lattice.
pub const DEFAULT_RESOLUTION: u32 = 3;

/// Number of random splits per experiment.
pub const DEFAULT_TRIALS: usize = 10;
