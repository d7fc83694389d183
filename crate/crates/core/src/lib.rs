//! Veiled-face recognition from fused deep features.
//!
//! The pipeline starts from FC6/FC7 activations stored as VPF-CSV files:
//! [`dataset`] loads them and derives task labels from sample names,
//! [`fusion`] merges the two layers element-wise, [`pca`] reduces the
//! dimension, [`classify`] trains one of the classifier families and
//! [`eval`] runs stratified cross-validation and computes the metrics.

pub mod classify;
pub mod dataset;
mod error;
pub mod eval;
pub mod fusion;
pub(crate) mod io;
pub mod pca;

pub use error::Error;
