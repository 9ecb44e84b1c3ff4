//! Detection of a binary patient condition from short clinical narratives.
//!
//! The crate covers the full pipeline: corpus handling with contamination-free
//! splits, French-aware preprocessing (negation prefixing, numeric-value
//! decoding), BoW / TF-IDF / skip-gram representations, sparsity reduction
//! (K-best selection, PCA, tied-weight autoencoder), three from-scratch
//! probabilistic classifiers and a cross-validated evaluation harness with an
//! imbalance index. Everything is deterministic given a seed.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod matrix;
pub mod model_io;
pub mod pipeline;
pub mod preprocess;
pub mod reduce;
pub mod rng;
pub mod vectorize;

pub use error::{Error, Result};
pub use matrix::FeatureMatrix;
