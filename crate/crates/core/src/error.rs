use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Bitstream ran out of bits while a syntax element was being read.
    #[error("bitstream exhausted at bit {0}")]
    Exhausted(usize),

    /// Syntax or semantic violation found while decoding.
    #[error("bitstream error at {context}: {message}")]
    Bitstream { context: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub(crate) fn bitstream(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Bitstream {
            context: context.into(),
            message: message.into(),
        }
    }
}
