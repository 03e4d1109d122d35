use thiserror::Error;

use crate::kernels::KernelKind;

/// Errors raised by the sampling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be finite and non-negative, got {value}")]
    InvalidWeight { name: &'static str, value: f64 },

    #[error("position {value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("{0:?} kernel does not support {1}")]
    Unsupported(KernelKind, &'static str),

    #[error("knot positions must be finite and strictly increasing (index {0})")]
    NonMonotoneKnots(usize),

    #[error("expected at least {expected} entries, got {got}")]
    TooShort { expected: usize, got: usize },

    #[error("knots and values differ in length ({knots} vs {values})")]
    LengthMismatch { knots: usize, values: usize },

    #[error("density must be finite and non-negative (index {index}, value {value})")]
    InvalidDensity { index: usize, value: f64 },

    #[error("ray has zero length")]
    DegenerateRay,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("sample count must be positive")]
    EmptyBatch,

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot write output `{path}`: {message}")]
    Output { path: String, message: String },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the configuration or output location rather than a run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Output { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
