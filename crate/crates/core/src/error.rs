use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid hyperparameter `{field}`: {reason}")]
    InvalidHyperparameter { field: &'static str, reason: String },

    #[error("invalid Cholesky factor: {0}")]
    InvalidCholesky(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("predictor {column} has zero sample second moment; its precision diagonal cannot be updated")]
    DegeneratePredictor { column: usize },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("chain state invariant violated: {0}")]
    Invariant(String),

    #[error("probit fit did not converge after ridge fallback (gradient max-norm {grad_norm:e})")]
    ProbitNotConverged { grad_norm: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
