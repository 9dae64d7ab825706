use thiserror::Error;

/// Errors shared by the linear algebra kernels and the solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("{op}: non-finite value at ({row}, {col})")]
    NonFinite {
        op: &'static str,
        row: usize,
        col: usize,
    },

    #[error("{op}: entry ({row}, {col}) out of bounds for {nrows}x{ncols}")]
    IndexOutOfBounds {
        op: &'static str,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("{op}: duplicate entry at ({row}, {col})")]
    DuplicateEntry {
        op: &'static str,
        row: usize,
        col: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("iteration breakdown at step {step}: {reason}")]
    Breakdown { step: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(op: &'static str, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
