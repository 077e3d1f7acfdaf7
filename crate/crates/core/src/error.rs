use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("element is not in the algebra (residual {residual:.3e})")]
    Membership { residual: f64 },

    #[error("invalid state: {0}")]
    StateInvalid(String),

    #[error("state is not even (residual {residual:.3e})")]
    NotEven { residual: f64 },

    #[error("grading of leg {leg} is not inner; the Klein transformation is unavailable")]
    GradingNotInner { leg: usize },

    #[error("grading is not implemented by a unitary on the ambient space: {0}")]
    GradingNotImplemented(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("factor index {index} out of range for a product of {legs} legs")]
    Index { index: usize, legs: usize },

    #[error("*-algebra closure did not stabilise within {rounds} rounds")]
    ClosureDiverged { rounds: usize },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
