use spca_conic::ConicError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpcaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),
    #[error("infeasible overlap: {0}")]
    InfeasibleOverlap(String),
    #[error("ill-posed sparsity budget: {0}")]
    BudgetIllPosed(String),
    #[error("C({p}, {k}) subsets exceed the enumeration guard")]
    TooLargeToEnumerate { p: usize, k: usize },
    #[error("infeasible rounding: {0}")]
    InfeasibleRounding(String),
    #[error("no index survives variable fixing")]
    EmptyActiveSet,
    #[error("unsupported rank {0}, the support-recovery protocol needs r = 2")]
    UnsupportedRank(usize),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ConicError> for SpcaError {
    fn from(e: ConicError) -> Self {
        SpcaError::Solver(e.to_string())
    }
}

impl From<csv::Error> for SpcaError {
    fn from(e: csv::Error) -> Self {
        SpcaError::InvalidInput(e.to_string())
    }
}

impl From<serde_json::Error> for SpcaError {
    fn from(e: serde_json::Error) -> Self {
        SpcaError::InvalidInput(e.to_string())
    }
}

impl SpcaError {
    /// Process exit code: 2 input, 3 solver, 4 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            SpcaError::Solver(_) | SpcaError::TooLargeToEnumerate { .. } => 3,
            SpcaError::Invariant(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SpcaError>;
