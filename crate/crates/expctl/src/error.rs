use std::path::PathBuf;

use swarm_throughput::SwarmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("line {line}: `{field}`: {message}")]
    Config { line: usize, field: String, message: String },

    #[error("invalid `{field}`: {message}")]
    Spec { field: String, message: String },

    #[error("sweep axes differ: `{left}` vs `{right}`")]
    AxisMismatch { left: String, right: String },

    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),

    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Model(#[from] SwarmError),
}

impl ExpError {
    pub fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        ExpError::Spec { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExpError::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExpError::Io { .. } => 1,
            ExpError::Model(e) if is_numerical(e) => 3,
            _ => 2,
        }
    }
}

/// Failures of a numerical method, as opposed to bad input.
pub fn is_numerical(e: &SwarmError) -> bool {
    matches!(
        e,
        SwarmError::NotConverged { .. }
            | SwarmError::Unstable { .. }
            | SwarmError::DegenerateRates(_)
            | SwarmError::ReducibleChain { .. }
    )
}

pub type Result<T> = std::result::Result<T, ExpError>;
