//! Validation of correlation-based clusterings of multivariate time series
//! against canonical correlation patterns.
//!
//! Runnable examples live in `examples/`:
//!
//! - `patterns`: enumerate and relax the canonical patterns, build level sets
//! - `distances`: compare the fifteen distance functions on a pair of matrices
//! - `map_segments`: map segment correlations to their nearest pattern
//! - `generate_subject`: build a synthetic subject and its data variants
//! - `score_clustering`: validity indices for the truth and degraded clusterings
//! - `rank_distances`: six-criterion evaluation and ranking of distance functions
//! - `statistics`: Wilcoxon tests, power and correlation sample sizes

pub mod canonical;
pub mod cli;
pub mod core_model;
pub mod datagen;
pub mod discrim_eval;
pub mod distances;
pub mod error;
pub mod indices;
pub mod mapping;
pub mod stats;

pub use error::{Error, Result};
