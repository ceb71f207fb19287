use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix dimension {0} exceeds the supported maximum of 16")]
    Size(usize),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("marginal is singular: smallest eigenvalue {min_eig:e} below {eps:e}")]
    SingularMarginal { min_eig: f64, eps: f64 },

    #[error("numeric integrity: {0}")]
    NumericIntegrity(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("degenerate denominator {0:e}")]
    DegenerateDenominator(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("objective returned a non-finite value at {0:?}")]
    NonFinite(Vec<f64>),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
