use thiserror::Error;

/// Errors raised by the matrix, grid, solver and checker layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid mismatch: functions live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    DomainError(String),

    /// `I - M` has no nonnegative inverse because `rho(M) >= 1`.
    #[error("matrix is not convergent to zero (spectral radius {spectral_radius})")]
    NotConvergent { spectral_radius: f64 },

    #[error("contraction certificate rejected: spectral radius {spectral_radius} is not below 1")]
    NotConvergentMatrix { spectral_radius: f64 },

    #[error("degenerate Lipschitz samples: {0}")]
    DegenerateSamples(String),

    #[error("regularity violated: |A_{component}(x)| = {value:.3e} < {floor:.3e} at node {node}")]
    RegularityViolation {
        component: usize,
        node: usize,
        value: f64,
        floor: f64,
    },

    #[error("outer iteration did not converge after {iterations} steps (best residual {best_residual:?})")]
    NoConvergence {
        iterations: usize,
        best_residual: Vec<f64>,
    },

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
