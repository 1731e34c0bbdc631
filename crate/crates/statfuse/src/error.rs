//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by statfuse operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input grids do not have compatible dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A constructor or operation received an argument outside its domain.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A metric or fusion denominator was identically zero.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed image file.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A sample value exceeded the header's declared maxval.
    #[error("sample out of range at byte {offset}: {message}")]
    Range { offset: usize, message: String },

    /// Band count unsupported by the requested file format.
    #[error("shape error: {0}")]
    Shape(String),

    /// Underlying I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
