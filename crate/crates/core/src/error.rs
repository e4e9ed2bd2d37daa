use thiserror::Error;

/// Errors produced by the entanglement toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid operator support: {0}")]
    InvalidSupport(String),

    #[error("mixture weight {0} is negative")]
    NegativeWeight(f64),

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),

    #[error("moment matrix needs {words} words, budget is {budget}")]
    WordBudget { words: usize, budget: usize },

    #[error("criterion does not detect the state anywhere in (0, 1]")]
    Undetected,

    #[error("sign pattern of the criterion is not monotone near p = {0}")]
    NonMonotone(f64),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian(_)
                | Error::ImaginaryResidue(_)
                | Error::NotPositive(_)
                | Error::TraceNotOne(_)
                | Error::NonMonotone(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
