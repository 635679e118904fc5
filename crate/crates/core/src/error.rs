use thiserror::Error;

/// Errors produced by the polynomial, resultant and solver routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("leading coefficient is singular or ill-conditioned (smallest singular value {smallest_singular:e})")]
    Normalization { smallest_singular: f64 },

    #[error("matrix violates the Sylvester structure (deviation {deviation:e})")]
    Structure { deviation: f64 },

    #[error("non-finite value encountered in {0}")]
    Numeric(String),

    #[error("step size underflow in {phase} integration at epsilon = {epsilon:e}")]
    Stalled { phase: &'static str, epsilon: f64 },

    #[error("perturbation norm stopped growing at epsilon = {epsilon:e}")]
    ContinuationStall { epsilon: f64 },

    #[error("no convergence after {iterations} outer iterations (best sigma_k = {sigma:e} at epsilon = {epsilon:e})")]
    NonConvergence {
        iterations: usize,
        epsilon: f64,
        sigma: f64,
    },

    #[error("echelon rank criterion not met up to window {max_window}")]
    EchelonConvergence { max_window: usize },

    #[error("rank-ambiguous pivot {pivot:e} (threshold {threshold:e})")]
    RankTolerance { pivot: f64, threshold: f64 },

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
