use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("format error in {path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("normalization stats error: {0}")]
    Stats(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("non-finite gradient: {count} entries, first at index {first}")]
    NonFinite { count: usize, first: usize },
    #[error("checkpoint corrupted: {0}")]
    Corruption(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint structure error: {0}")]
    Structure(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("clip selection error: {0}")]
    Selection(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Stable short name of the variant, for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Argument(_) => "argument",
            Error::Format { .. } => "format",
            Error::Stats(_) => "stats",
            Error::Data(_) => "data",
            Error::NonFinite { .. } => "non_finite",
            Error::Corruption(_) => "corruption",
            Error::Version { .. } => "version",
            Error::Structure(_) => "structure",
            Error::Config(_) => "config",
            Error::Selection(_) => "selection",
            Error::Io(_) => "io",
        }
    }
}
