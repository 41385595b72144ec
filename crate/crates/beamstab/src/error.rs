use thiserror::Error;

/// Errors produced by the solvers and constructors in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density mass constraint violated: expected {expected}, got {actual}")]
    MassViolation { expected: f64, actual: f64 },

    #[error("root search found only {found} of {requested} eigenvalues below mu = {ceiling}")]
    NotEnoughRoots {
        found: usize,
        requested: usize,
        ceiling: f64,
    },

    #[error("two roots within {gap:.3e} in mu near {mu:.6}; possible loss of simplicity")]
    RootsTooClose { mu: f64, gap: f64 },

    #[error("null space of the boundary system is not one-dimensional (sigma ratio {0:.3e})")]
    DegenerateNullSpace(f64),

    #[error("weighted Gram matrix is not positive definite (min eigenvalue {0:.3e})")]
    GramNotPositiveDefinite(f64),

    #[error("eigenvalue solver failed: {0}")]
    EigenSolver(String),

    #[error("energy drift {drift:.3e} exceeded tolerance {tol:.3e}")]
    DriftExceeded { drift: f64, tol: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error(
        "level set of the g-profile has positive measure at the critical level \
         (measure mismatch {mismatch:.3e} at t = {level:.6e})"
    )]
    PlateauAtCriticalLevel { level: f64, mismatch: f64 },

    #[error("optimization produced no usable iterate: {0}")]
    EmptyPool(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
