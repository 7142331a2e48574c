use alloc::string::String;
use core::fmt;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Tensor shapes are inconsistent with the requested operation.
    Shape(String),
    /// A numeric range precondition failed (e.g. uniform lo >= hi).
    Range(String),
    /// A model or training configuration is invalid.
    Config(String),
    /// Input data cannot drive the requested computation (empty sets etc.).
    Data(String),
    /// A weight document is malformed, truncated, or version-incompatible.
    Persistence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Range(msg) => write!(f, "range error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Persistence(msg) => write!(f, "persistence error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
