use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure has non-positive total mass")]
    NonPositiveMass,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("renormalization unsupported: {0}")]
    UnsupportedRenormalization(String),

    #[error("bound not applicable: {0}")]
    InapplicableBound(String),

    #[error("iterates left the ball of radius {radius:e} after {iterations} iterations (|x| = {norm:e})")]
    DivergenceDetected {
        iterations: usize,
        norm: f64,
        radius: f64,
    },

    #[error("no convergence after {iterations} iterations (|V| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("oracle lattice has {0} points, limit is 100000000")]
    OracleTooLarge(u128),

    #[error("experiment not applicable: {0}")]
    InapplicableExperiment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Io(String),
}
