use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum RomError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("degenerate spectrum: all singular values are zero")]
    DegenerateSpectrum,

    #[error("snapshot column {column} has zero norm")]
    ZeroNormColumn { column: usize },

    #[error("kernel matrix is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("non-finite likelihood objective at log length scale {theta}")]
    NonFiniteObjective { theta: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("non-finite gradient in layer {layer} ({kind})")]
    NonFiniteGradient { layer: usize, kind: String },

    #[error("solves failed at design indices {indices:?}; first error: {first}")]
    DesignFailures {
        indices: Vec<usize>,
        first: Box<RomError>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RomError {
    pub fn arg(msg: impl Into<String>) -> Self {
        RomError::Argument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RomError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, RomError>;
