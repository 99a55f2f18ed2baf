use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate element: corners {0} and {1} coincide")]
    DegenerateElement(usize, usize),

    #[error("invalid reference element: area {0} is not positive")]
    InvalidReference(f64),

    #[error("degenerate edge: zero length between its endpoints")]
    DegenerateEdge,

    #[error("degenerate triangle: zero area")]
    DegenerateTriangle,

    #[error("mesh connectivity mismatch: {0}")]
    ConnectivityMismatch(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("invalid motion: {0}")]
    InvalidMotion(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("selective triangulation requested without a per-quad diagonal choice")]
    MissingDiagonalChoice,

    #[error("dof index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("conflicting constraint on dof {dof}: {first} vs {second}")]
    ConflictingConstraint { dof: usize, first: f64, second: f64 },

    #[error("factorization breakdown at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("solve residual {residual:e} exceeds tolerance {tol:e}")]
    SolveTolerance { residual: f64, tol: f64 },

    #[error("solver failed at step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("inadmissible state in element {element}: det F = {det:e}")]
    Inadmissible { element: usize, det: f64 },

    #[error("non-positive jacobian {det:e} in element {element}")]
    NonPositiveJacobian { element: usize, det: f64 },

    #[error("newton failed to converge in increment {increment}: residual {residual:e}")]
    NewtonDiverged { increment: usize, residual: f64 },

    #[error("state is not converged: residual {residual:e} > tolerance {tol:e}")]
    Unconverged { residual: f64, tol: f64 },

    #[error("sweep of {points} points exceeds the cap of {cap}")]
    SweepTooLarge { points: usize, cap: usize },

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::StepFailed {
            step,
            source: Box::new(self),
        }
    }
}
