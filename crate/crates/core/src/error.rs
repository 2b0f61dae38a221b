use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh generation failed: {0}")]
    Generation(String),
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unsupported quadrature degree {0} (supported: 4, 5, 6)")]
pub struct QuadratureError(pub usize);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid model parameter `{name}` = {value}: must be finite and strictly positive")]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
}

/// Failure of a linear solve. Every variant carries the smallest relative
/// residual `‖b − Ax‖ / ‖b‖` that was reached.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factorization breakdown ({reason}); best relative residual {best_residual:e}")]
    Breakdown { reason: String, best_residual: f64 },
    #[error("no convergence after {iterations} iterations; best relative residual {best_residual:e}")]
    NotConverged { iterations: usize, best_residual: f64 },
}

impl SolveError {
    pub fn best_residual(&self) -> Option<f64> {
        match self {
            SolveError::DimensionMismatch(_) => None,
            SolveError::Breakdown { best_residual, .. } | SolveError::NotConverged { best_residual, .. } => {
                Some(*best_residual)
            }
        }
    }
}
