use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or a request the toolkit refuses to run.
    Usage,
    /// Well-formed input outside an operation's mathematical domain.
    Domain,
    /// Filesystem trouble.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidField(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("operands belong to different fields ({left} vs {right})")]
    FieldMismatch { left: String, right: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("stream would produce {cardinality} items, above the limit of {limit}; use count-only mode or raise the limit")]
    CardinalityExceeded { cardinality: u128, limit: u128 },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) | Error::Overflow(_) => ErrorKind::Domain,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Usage,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}
