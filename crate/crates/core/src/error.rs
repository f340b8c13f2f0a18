use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("singular value decomposition did not converge")]
    SvdNonConvergence,

    #[error("eigenvalue decomposition did not converge")]
    EigenNonConvergence,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("horizon of {0} rounds exceeded")]
    HorizonExceeded(usize),

    #[error("expected a bit (0 or 1), got {0:?}")]
    NotABit(String),

    #[error("dense construction refused for n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
