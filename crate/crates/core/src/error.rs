use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("node {node} is not in the boundary set")]
    InvalidAction { node: usize },

    #[error("episode is over (step {step} of budget {budget})")]
    EpisodeOver { step: usize, budget: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("{solver} did not converge: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Convergence {
        solver: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("targets unreachable: {0}")]
    Unreachable(String),

    #[error("non-finite value: {0}")]
    Numerical(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
