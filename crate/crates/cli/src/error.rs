use std::path::PathBuf;

use radau_core::{ProblemError, SolverError, TableauError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    UnknownProblem(#[from] ProblemError),
    #[error("{problem}: {source}")]
    Solver {
        problem: String,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("plot needs at least 2 successful records, got {0}")]
    TooFewPoints(usize),
}

impl CliError {
    /// Process exit status: 1 for configuration problems, 2 for solver
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver { .. } | CliError::Tableau(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
