//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data, reported with a 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input violates a documented precondition or invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Bad configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Shape or channel mismatch while propagating an architecture,
    /// naming the offending layer.
    #[error("architecture error at layer {layer} ({desc}): {message}")]
    Arch {
        layer: usize,
        desc: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An internal invariant was violated; indicates a bug.
    #[error("internal invariant violation: {0}")]
    Internal(String),

    /// An error annotated with the pipeline stage it occurred in.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for this error: 1 input, 2 config, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidInput(_) | Error::Arch { .. } | Error::Io(_) => 1,
            Error::Config(_) => 2,
            Error::Internal(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
