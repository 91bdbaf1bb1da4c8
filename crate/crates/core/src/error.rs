use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    /// The scenario text could not be parsed.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// A parsed value violates a documented invariant.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numerical argument is outside its domain of definition.
    #[error("{0}")]
    Argument(String),

    /// All-zero input where a normalization is required.
    #[error("map is identically zero; normalization undefined")]
    ZeroMap,

    /// Custom aperture profile could not be loaded.
    #[error("profile {}: {message}", path.display())]
    Profile { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
