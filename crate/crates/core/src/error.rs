use thiserror::Error;

/// Errors raised by the simulation, cancellation and rate routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range or a shape constraint.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// An interference symbol is too weak to divide by or to build a
    /// cancellation row from.
    #[error("interference symbol {index} has magnitude {magnitude:e}, below the zero-power threshold")]
    ZeroInterference { index: usize, magnitude: f64 },

    /// A matrix that must be full rank (or well conditioned) is not.
    #[error("numerically degenerate system{}: {detail}", block.map(|b| format!(" in block {b}")).unwrap_or_default())]
    Degenerate { block: Option<usize>, detail: String },

    /// Exhaustive detection would visit more hypotheses than allowed.
    #[error("exhaustive search needs {needed} hypotheses, cap is {cap}")]
    EnumerationCap { needed: u128, cap: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
