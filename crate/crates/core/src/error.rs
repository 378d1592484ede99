use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("driving |G| = {drive} is not above the threshold gamma = {gamma}")]
    BelowThreshold { drive: f64, gamma: f64 },

    #[error("critical regime (|G| = gamma): use the dedicated critical formulas")]
    CriticalRegime,

    #[error("non-resonant driving (omega_d = {0}): use admissible_order_parameters")]
    NonResonant(f64),

    #[error("integration diverged at step {step} (|value| = {value:e}); reduce dt")]
    Diverged {
        step: usize,
        trajectory: Option<usize>,
        value: f64,
    },

    #[error("Liouvillian dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failed on a {dim}x{dim} block: {message}")]
    Eigensolver { dim: usize, message: String },

    #[error("linear solve failed on a {dim}x{dim} system: {message}")]
    LinearSolve { dim: usize, message: String },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("no half-maximum crossing bracketed within |omega| <= {0}")]
    NoHalfMaximum(f64),

    #[error("no stable exponential fit: {0}")]
    NoExponentialFit(String),

    #[error("free energy is not confining")]
    NonConfining,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid data: {0}")]
    InvalidData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. }
                | Error::Eigensolver { .. }
                | Error::LinearSolve { .. }
                | Error::Quadrature(_)
                | Error::NoHalfMaximum(_)
                | Error::NoExponentialFit(_)
        )
    }
}
