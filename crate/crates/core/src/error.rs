use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("the zero function has no order")]
    ZeroFunction,

    #[error("invalid marked surface: {0}")]
    InvalidSurface(String),

    #[error("point index {index} out of range 1..={max}")]
    PointIndex { index: usize, max: usize },

    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: i32, found: i32 },

    #[error("sections live on different marked surfaces")]
    SurfaceMismatch,

    #[error("section is not admissible: {0}")]
    Inadmissible(String),

    #[error("basis construction failed: {0}")]
    Basis(String),

    #[error("invalid Lie algebra: {0}")]
    InvalidLieAlgebra(String),

    #[error("elements belong to different Lie algebras")]
    LieMismatch,

    #[error("domain mismatch: {0}")]
    Domain(String),

    #[error("value requested outside the supported window: {0}")]
    OutsideWindow(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),
}

pub type Result<T> = std::result::Result<T, KnError>;
