//! Bearing-fault diagnosis with kernel PCA or stacked-autoencoder features
//! and one-against-all Gaussian-process classifiers.

pub mod artifact;
pub mod cli;
pub mod dataset;
mod diagnoser;
pub mod error;
pub mod eval;
pub mod features;
pub mod gpc;
pub mod linalg;
pub mod ovr;
pub mod seed;

pub use diagnoser::{Diagnoser, PipelineConfig};
pub use error::{Error, Result};
