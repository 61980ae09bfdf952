use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
}
