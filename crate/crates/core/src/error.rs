use thiserror::Error;

use crate::jets::Var;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet shape mismatch: {left:?} vs {right:?} (coords, order)")]
    Shape { left: (usize, u32), right: (usize, u32) },
    #[error("series is not divisible by {var}^{power} (residual coefficient {residual:.3e})")]
    NotDivisible { var: Var, power: u32, residual: f64 },
    #[error("singular: {0}")]
    Singular(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("metric is degenerate: {0}")]
    Degenerate(String),
    #[error("metric is not Kaehler at the requested order: {0}")]
    NotKaehler(String),
    #[error("signature mismatch: {0}")]
    Signature(String),
    #[error("jet order exhausted: {0}; increase the truncation order")]
    InsufficientOrder(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
