use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("block length {0} is not a power of two >= 2")]
    BlockLength(usize),

    #[error("information length {k} is invalid for block length {n}")]
    InfoLength { n: usize, k: usize },

    #[error("frozen set is invalid: {0}")]
    FrozenSet(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-binary value {value} at index {index}")]
    NonBinary { index: usize, value: u8 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
