use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at x = {x}")]
    NonFinite { x: f64 },

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("matrix dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {z} is within the axis guard; use the boundary-value path")]
    OnAxis { z: Complex64 },

    #[error("Hölder exponent must lie in (0, 1), got {0}")]
    HolderExponent(f64),

    #[error("function vanishes on the contour near x = {x}")]
    ZeroOnContour { x: f64 },

    #[error("winding number {raw} is not resolved to an integer; refine the grid")]
    IndexResolution { raw: f64 },

    #[error("nonzero index {index}: no canonical factorization")]
    NonzeroIndex { index: i64 },

    #[error("function must tend to 1 at infinity, got {value}")]
    NotNormalized { value: Complex64 },

    #[error("class conditions violated: {0}")]
    InvalidClass(String),

    #[error("internal inconsistency in {what}: defect {defect:e}")]
    Inconsistent { what: &'static str, defect: f64 },

    #[error("order {k} out of range (have {available} terms)")]
    OrderOutOfRange { k: usize, available: usize },

    #[error("asymptotic series diverges; term norms {norms:?}")]
    Divergence { norms: Vec<f64> },

    #[error("pole {pole} lies on the real axis")]
    PoleOnAxis { pole: Complex64 },

    #[error("singular matrix at x = {x}")]
    Singular { x: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}
