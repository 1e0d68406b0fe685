use crate::image::Space;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("color space mismatch: expected {expected:?}, got {actual:?}")]
    SpaceMismatch { expected: Space, actual: Space },

    #[error("invalid white point ({0}, {1}, {2}): all components must be strictly positive")]
    InvalidWhite(f64, f64, f64),

    #[error("singular conversion matrix: |det| = {0:e}")]
    SingularMatrix(f64),

    #[error("{0}")]
    Domain(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unsupported image format: {0}")]
    UnknownFormat(String),

    #[error("empty map")]
    EmptyMap,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
