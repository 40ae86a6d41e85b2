use thiserror::Error;

/// Errors raised by code construction, encoding and the file formats.
///
/// Decoding failures are not errors: they are reported through
/// [`crate::codec::DecodeStatus`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("symbol length mismatch: expected {expected} bytes, found {found}")]
    SymbolLength { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("invalid matrix row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("invalid base matrix: {0}")]
    InvalidBase(String),

    #[error("source degree {src_degree} exceeds base row count {a}")]
    SourceDegree { src_degree: usize, a: usize },

    #[error("expansion factor z={z} must exceed the maximum shift M={max_shift}")]
    ShiftTooLarge { z: usize, max_shift: usize },

    #[error("code dimension k={k} is not a multiple of b-a={groups}")]
    NotDivisible { k: usize, groups: usize },

    #[error("code is not encodable: {0}")]
    NotEncodable(String),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("malformed symbol file: {0}")]
    SymbolFile(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
