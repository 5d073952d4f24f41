use thiserror::Error;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point ({u}, {v}) lies outside the chart domain")]
    OutOfDomain { u: f64, v: f64 },
    #[error("degenerate geometry at ({u}, {v}): {detail}")]
    Degenerate { u: f64, v: f64, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate immersion at parameters {params:?}: {detail}")]
    Immersion { params: Vec<f64>, detail: String },
}

impl GeometryError {
    pub(crate) fn degenerate(q: crate::geometry::Vec2, detail: impl Into<String>) -> Self {
        GeometryError::Degenerate { u: q[0], v: q[1], detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;
