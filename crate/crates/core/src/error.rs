//! Shared error type.

use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: &'static str },

    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is singular or numerically rank deficient ({context})")]
    Singular { context: &'static str },

    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: &'static str },

    #[error("nonpositive curvature along the search direction: p'Ap = {curvature}")]
    NonpositiveCurvature { curvature: f64 },

    #[error("factor for mode {mode} is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { mode: usize, deviation: f64 },

    #[error("points are near the cut locus: cond(X'Y) = {condition:e}")]
    CutLocus { condition: f64 },

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("line search failed: {reason}")]
    LineSearchFailed { reason: &'static str },

    #[error("malformed {format} data at byte {offset}: {reason}")]
    Format { format: &'static str, offset: usize, reason: String },
}

impl Error {
    pub(crate) fn dims(op: &'static str, detail: String) -> Self {
        Error::DimensionMismatch { op, detail }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
