use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: value {index} is not a number: {token:?}")]
    Parse {
        path: PathBuf,
        index: usize,
        token: String,
    },

    #[error("value {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("no samples")]
    NoSamples,

    #[error("record has {got} samples, segmentation needs {needed}")]
    RecordTooShort { needed: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown channel {0:?}")]
    UnknownChannel(String),

    #[error("unknown feature extraction method {0:?}")]
    UnknownMethod(String),

    #[error("class {class} has {have} samples, needs at least {need}")]
    ClassTooSmall { class: u32, have: usize, need: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cholesky failed even with jitter {jitter:e} (mean diagonal {mean_diag:e})")]
    Cholesky { jitter: f64, mean_diag: f64 },

    #[error("newton iterations did not converge after {iterations} steps (gradient max-norm {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("autoencoder stage {stage}: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { stage: usize, epoch: usize },

    #[error("hyperparameter search failed at every start: {0}")]
    AllStartsFailed(String),

    #[error("class {class}: {source}")]
    ClassFit {
        class: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Degenerate(_)
            | Error::Cholesky { .. }
            | Error::NotConverged { .. }
            | Error::NonFiniteLoss { .. }
            | Error::AllStartsFailed(_) => true,
            Error::ClassFit { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
