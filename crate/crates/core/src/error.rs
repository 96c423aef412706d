use thiserror::Error;

/// Errors produced by the kernel design and resampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence is not proper: a root of its z-transform lies {distance:.3e} from the unit circle")]
    NotProper { distance: f64 },
    #[error("sequence is not invertible: {0}")]
    NotInvertible(String),
    #[error("inverse needs a window of {needed} samples but the budget is {budget}")]
    TruncationBudgetExceeded { needed: usize, budget: usize },
    #[error("degree must be an odd positive integer, got {0}")]
    InvalidDegree(usize),
    #[error("degree {degree} exceeds the supported maximum {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },
    #[error("correlation matrix is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("correlation matrix is not Hermitian")]
    NotHermitian,
    #[error("reference signal samples have zero energy")]
    DegenerateSignal,
    #[error("grid is misaligned: {0}")]
    GridMisaligned(String),
    #[error("grids differ: {0}")]
    GridMismatch(String),
    #[error("image dimensions differ: {0}")]
    DimensionMismatch(String),
    #[error("image too small: {0}")]
    ImageTooSmall(String),
    #[error("perturbation is outside the feasible set: {0}")]
    InfeasiblePerturbation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that come from the numerics rather than from bad
    /// input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotProper { .. }
                | Error::NotInvertible(_)
                | Error::TruncationBudgetExceeded { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NotHermitian
                | Error::DegenerateSignal
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
