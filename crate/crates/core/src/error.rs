use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("derivative of order {requested} requested for {group}, but only {available} is available")]
    UnsupportedOrder { group: &'static str, requested: usize, available: usize },

    #[error("degenerate T matrix: |det| = {det:e} is below the guard {guard:e}")]
    DegenerateMatrix { det: f64, guard: f64 },

    #[error("oscillation guard violated: {what}; need at least {required} {unit}")]
    Nyquist { what: String, required: usize, unit: &'static str },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite integrand in lattice cube centered at {cube:?}")]
    NonFinite { cube: Vec<i64> },

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("coverage failure: point {point:?} is not covered")]
    Coverage { point: Vec<f64> },

    #[error("SVD failed for matrix `{provenance}`")]
    Svd { provenance: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field: field.to_string(), reason: reason.into() }
}
