//! Regression-based hypergraph learning.
//!
//! The crate builds hypergraphs whose hyperedges and weights come from
//! leave-one-out regression coefficients (sparse or ridge) instead of raw
//! distances, and runs two learners on top of them:
//!
//! * hypergraph spectral clustering (`learning::rhsc`): normalized hypergraph
//!   Laplacian, spectral embedding, k-means;
//! * hypergraph transduction (`learning::transduce`): semi-supervised labeling
//!   by a regularized least-squares solve against a partial label matrix.
//!
//! A distance-based kNN hypergraph (`hypergraph::build_knn_edges`) is included
//! as the baseline the regression construction is measured against, and the
//! `dataset` module provides seeded synthetic generators plus salt-and-pepper
//! corruption for robustness experiments.

pub mod dataset;
pub mod error;
pub mod hypergraph;
pub mod learning;
pub mod regression;
pub mod similarity;

pub use error::{Error, Result};

// public API types are nalgebra matrices; callers need the same version
pub use nalgebra;

/// Crate version reported by the CLI and embedded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
