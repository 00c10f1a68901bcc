use std::io;

use thiserror::Error;

pub type Result<T, E = LmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {needed} sentences requested but only {available} available (short by {shortfall})")]
    InsufficientData {
        needed: usize,
        available: usize,
        shortfall: usize,
    },

    #[error("undefined Good-Turing estimate at r={r}: {reason}")]
    UndefinedEstimate { r: u64, reason: String },

    #[error("cannot smooth count-of-counts: {0}")]
    CannotSmooth(String),

    #[error("undefined distribution: history [{history}] has no counts")]
    UndefinedDistribution { history: String },

    #[error("infinite entropy: zero probability for n-gram [{ngram}]")]
    InfiniteEntropy { ngram: String },

    #[error("non-finite objective {value} at point {point:?}")]
    NonFiniteObjective { value: f64, point: Vec<f64> },

    #[error("vocabulary mismatch: model has vocabulary {expected}, input has {found}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl LmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LmError::InvalidParameter(msg.into())
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        LmError::Format {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by numerical degeneracy rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            LmError::UndefinedEstimate { .. }
                | LmError::CannotSmooth(_)
                | LmError::UndefinedDistribution { .. }
                | LmError::InfiniteEntropy { .. }
                | LmError::NonFiniteObjective { .. }
        )
    }
}
