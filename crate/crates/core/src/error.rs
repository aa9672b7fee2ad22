use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not Lorentzian with signature (+,-,-,-): {0}")]
    NonLorentzianMetric(String),

    #[error("metric has a non-zero shift component g_0{index} = {value}")]
    NonStaticMetric { index: usize, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("function evaluation failed (non-finite value) at {0}")]
    EvaluationFailure(String),

    #[error("velocity solve diverged after {iterations} iterations, residual {residual:e}")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("velocity Hessian rank changed across the probe neighbourhood: {expected} -> {found}")]
    RankDrift { expected: usize, found: usize },

    #[error("multipliers are not fixed for constraint(s) {0:?}; supply lambda explicitly")]
    UnresolvedMultipliers(Vec<usize>),

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("state became non-finite in field `{field}` at step time {time}")]
    NonFiniteState { field: &'static str, time: f64 },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("frequency fit failed: {0}")]
    FitFailure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("manifest missing in {0}")]
    ManifestMissing(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
