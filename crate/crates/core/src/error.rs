use std::path::PathBuf;

/// Errors raised by codec construction, arithmetic, and file handling.
///
/// Channel damage is never an error: decoding reports it through
/// [`DecodeReport`](crate::codec::DecodeReport) instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size that exceeds what the code can represent.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Input violating a documented precondition (lengths, alignment).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Parity-check construction could not satisfy the requested degrees.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
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

pub type Result<T> = std::result::Result<T, Error>;
