use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("grade mismatch: expected {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },

    #[error("grade {grade} exceeds ambient dimension {dim}")]
    GradeOverflow { grade: usize, dim: usize },

    #[error("ambient dimension {0} is not supported (max {max})", max = crate::exterior::MAX_DIM)]
    DimTooLarge(usize),

    #[error("invalid axis {axis} for dimension {dim}")]
    BadAxis { axis: usize, dim: usize },

    #[error("derivative depth {required} exceeds oracle budget {available}")]
    DepthExceeded { required: usize, available: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("decomposition does not reconstruct the chain (residual l1 mass {residual:e})")]
    Reconstruction { residual: f64 },

    #[error("trajectory left the bounding region at t = {t}")]
    LeftRegion { t: f64 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, got })
    }
}

pub(crate) fn check_grade(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::GradeMismatch { expected, got })
    }
}
