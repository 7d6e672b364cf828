use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The requested point lies outside the region where the series
    /// representation is reliable; callers fall back to Monte Carlo.
    #[error("series not usable at {value} (convergence threshold {threshold})")]
    SeriesRegion { value: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("density underflow: conditional expectation undefined")]
    DegenerateDensity,

    #[error("degenerate cluster {cluster}: {reason}")]
    DegenerateCluster { cluster: usize, reason: String },

    #[error("insufficient data: n = {n} must exceed {required}")]
    InsufficientData { n: usize, required: usize },

    #[error("non-finite value in data row {row}")]
    NonFiniteData { row: usize },

    #[error("singular dispersion update for component {component}")]
    SingularUpdate { component: usize },

    #[error("component {component} has {count} assigned points, at least {required} needed")]
    TooFewPoints { component: usize, count: usize, required: usize },

    #[error("slice sampler exceeded {0} evaluations")]
    SliceFailure(usize),

    #[error("label length mismatch: {left} vs {right}")]
    LabelLengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
