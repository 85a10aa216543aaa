use thiserror::Error;

/// Why a serialized stream could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Corruption {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("stream truncated")]
    Truncated,
    #[error("{0} trailing bytes after payload")]
    TrailingData(usize),
    #[error("{0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmapError {
    #[error("bad .fmap magic")]
    BadMagic,
    #[error("unsupported .fmap version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown sample format tag {0}")]
    UnknownFormat(u8),
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("non-finite FP16 sample at index {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("one-endpoint mode requires nonnegative samples, found {0}")]
    ModeViolation(String),
    #[error("corrupt stream: {0}")]
    CorruptStream(#[from] Corruption),
    #[error("fmap: {0}")]
    Fmap(#[from] FmapError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn malformed(msg: impl Into<String>) -> Error {
    Error::CorruptStream(Corruption::Malformed(msg.into()))
}
