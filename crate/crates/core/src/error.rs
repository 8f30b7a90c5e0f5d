use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("hull construction error: {0}")]
    Construction(String),
    #[error("lookup error: {0}")]
    Lookup(String),
    #[error("pose outside model validity range: {0}")]
    ModelRange(String),
    #[error("static equilibrium not found: {0}")]
    Equilibrium(String),
    #[error("integration failed at t = {time:.3} s: {reason}")]
    Integration { time: f64, reason: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("non-uniform time grid: {0}")]
    NonUniformGrid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite gradient in layer {layer} at step {step}")]
    Gradient { layer: usize, step: usize },
    #[error("training diverged at epoch {epoch} (loss {loss:e})")]
    Diverged {
        epoch: usize,
        loss: f64,
        history: Vec<EpochLoss>,
    },
    #[error("standardization error: {0}")]
    Standardization(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("route error: {0}")]
    Route(String),
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("alignment error: missing keys {0:?}")]
    Alignment(Vec<String>),
    #[error("insufficient records for heading {heading}: need {needed}, found {found}")]
    InsufficientRecords {
        heading: u32,
        needed: usize,
        found: usize,
    },
    #[error("no checkpoint for relative heading {0} deg")]
    MissingCheckpoint(u32),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One row of a training loss history.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub validation: f64,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data/format, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 1,
            Error::Domain(_)
            | Error::ModelRange(_)
            | Error::Equilibrium(_)
            | Error::Integration { .. }
            | Error::Gradient { .. }
            | Error::Diverged { .. }
            | Error::Standardization(_)
            | Error::Statistics(_) => 3,
            _ => 2,
        }
    }
}
