use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;
use crate::qp::QpSolution;
use crate::trace::IterationTrace;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("half-space direction must be nonzero")]
    ZeroNormal,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum QpError {
    #[error("QP did not converge within {limit} iterations (KKT residual {:.3e})", best.kkt_residual)]
    IterationLimitExceeded { limit: usize, best: Box<QpSolution> },
    #[error("constraint set is empty")]
    InfeasibleSet,
    #[error("brute-force oracle handles at most {max} constraints, got {got}")]
    DimensionTooLarge { got: usize, max: usize },
    #[error("Hessian is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error("Mann coefficient {value} outside (0, {upper})")]
    ParameterOutOfRange { value: f64, upper: f64 },
    #[error(transparent)]
    Qp(#[from] QpError),
}

/// Which sub-step of an outer iteration produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Step 1: `y_n^i`.
    Predictor,
    /// Step 2: `z_n^i`.
    Corrector,
    /// `S_j` applied to `t_n`.
    FixedPointMap,
    /// Projection of `x_0` onto `C ∩ C_n ∩ Q_n`.
    HybridProjection,
    /// Initial projection of `x_0` onto `C`.
    Initialization,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("instance failed validation: {0}")]
    InvalidInstance(ValidationReport),
    #[error("configuration failed validation: {0}")]
    InvalidConfig(ValidationReport),
    #[error("iteration {iteration}: {stage:?} subproblem {index} failed: {source}")]
    Subproblem {
        iteration: usize,
        stage: Stage,
        index: usize,
        #[source]
        source: QpError,
    },
    #[error("iteration {iteration}: hybrid half-space intersection is empty")]
    EmptyIntersection { iteration: usize },
    #[error("no candidates to select from")]
    EmptyCandidateList,
    #[error("instance carries no known solution")]
    MissingKnownSolution,
    #[error("{name} = {value} outside admissible range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },
    #[error("worker pool: {0}")]
    ThreadPool(String),
    #[error("run aborted after {} records: {cause}", partial.records.len())]
    Aborted {
        partial: Box<IterationTrace>,
        cause: Box<SolverError>,
    },
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
