use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature in dimension {0} is not supported (max {max})", max = crate::gauss::MAX_QUADRATURE_DIM)]
    QuadratureDimension(usize),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("failed to converge: {0}")]
    NoConvergence(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("wrong partition kind: {0}")]
    WrongKind(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
