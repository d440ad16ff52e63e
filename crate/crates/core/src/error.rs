use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DdpsError>;

#[derive(Debug, Error)]
pub enum DdpsError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported Matrix Market field or symmetry: {0}")]
    UnsupportedField(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid part count {parts} for {n} rows")]
    InvalidPartCount { parts: usize, n: usize },

    #[error("bad part vector: {0}")]
    BadPartVector(String),

    #[error("diagonal block {0} is singular")]
    SingularBlock(usize),

    #[error("reduced system is singular")]
    ReducedSingular,

    #[error("allocation of {bytes} bytes failed")]
    OutOfMemory { bytes: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl DdpsError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        DdpsError::Parse {
            line,
            msg: msg.into(),
        }
    }
}
