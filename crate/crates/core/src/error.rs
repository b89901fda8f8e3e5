use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Torus vectors are too close to a dependency for binary64 grid colorings.
    #[error("precision failure: {0}")]
    Precision(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Load(#[from] LoadError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Failures while decoding an EQDC container.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("bad magic: not an EQDC container")]
    BadMagic,
    #[error("unsupported container version {0:?}")]
    UnsupportedVersion(String),
    #[error("truncated container: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("hash mismatch in section `{0}`")]
    HashMismatch(String),
    #[error("malformed container: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
