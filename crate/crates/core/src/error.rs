use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "degenerate bath parameters: beta*gamma = {beta_gamma} coincides with the Matsubara pole 2*pi*{k}; \
         perturb the temperature slightly"
    )]
    DegenerateParameters { beta_gamma: f64, k: usize },

    #[error("quadrature failed to converge at tau = {tau_fs} fs (estimated error {error:e})")]
    QuadratureFailure { tau_fs: f64, error: f64 },

    #[error("hierarchy too large: {count} auxiliary operators exceeds the budget of {budget}")]
    Capacity { count: usize, budget: usize },

    #[error(
        "propagation diverged at t = {time_fs} fs (non-finite auxiliary operator); \
         try a smaller dt or a deeper hierarchy"
    )]
    Divergence { time_fs: f64 },

    #[error("convergence budget exhausted at L = {level}, K = {matsubara}; last population delta {delta:e}")]
    NotConverged {
        level: usize,
        matsubara: usize,
        delta: f64,
    },

    #[error("invalid state{}: {reason}", at_index.map(|i| format!(" at time index {i}")).unwrap_or_default())]
    InvalidState {
        reason: String,
        at_index: Option<usize>,
    },

    #[error("invalid site pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("coherence length undefined for an all-zero matrix")]
    UndefinedMeasure,

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Consistency { path: PathBuf, message: String },

    #[error("import rejected at record {record}: {message}")]
    Import { record: usize, message: String },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
