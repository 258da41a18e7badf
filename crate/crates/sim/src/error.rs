//! Error types shared across the simulator.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SimError>;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum SimError {
    /// An argument fell outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A profile/flag combination the model does not define.
    #[error("unsupported variant: {0}")]
    Unsupported(String),

    /// A scenario or file value failed validation; names the offending key.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// A value that cannot be computed for the given inputs.
    #[error("not computable: {0}")]
    NotComputable(String),

    /// An internal invariant was violated (a bug, not bad input).
    #[error("logic error: {0}")]
    Logic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
