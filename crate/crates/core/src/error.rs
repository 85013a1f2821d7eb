use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem with an instance: counts and matrix shapes disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// The LP layer gave up or could not certify its answer.
    #[error("solver failure: {0}")]
    Solver(String),

    #[error("infeasible linear program")]
    Infeasible,

    #[error("unbounded linear program")]
    Unbounded,
}

impl Error {
    /// Errors caused by bad user input, as opposed to numerical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::InvalidArgument(_)
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::Json(_)
        )
    }
}
