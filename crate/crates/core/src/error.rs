use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// The DE map preserves [0,1]; a non-finite value means a kernel bug.
    #[error("non-finite erasure probability at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("no decoding wave: {0}")]
    NoWave(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
