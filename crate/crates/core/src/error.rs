use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("near collision between nodes {i} and {j} (distance {dist:e})")]
    NearCollision { i: usize, j: usize, dist: f64 },
    #[error("convexity constraint violated: min radius of curvature {min_rho} < {eps}")]
    ConstraintViolation { min_rho: f64, eps: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("undefined point: {0}")]
    UndefinedPoint(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("degenerate quotient: {0}")]
    Degenerate(String),
    #[error("projection failed after {0} sweeps")]
    ProjectionFailure(usize),
}

pub type Result<T> = std::result::Result<T, FracError>;
