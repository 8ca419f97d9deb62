use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum SimError {
    #[error(transparent)]
    Code(#[from] polar_blind::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SimError {
    /// Process exit code: 1 for bad configuration, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) | SimError::Code(_) => 1,
            SimError::UndefinedRate(_) | SimError::Io { .. } | SimError::Json(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
