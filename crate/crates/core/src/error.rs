use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("functions live on different momentum grids ({0} vs {1})")]
    GridMismatch(u64, u64),
    #[error("node index {index} out of range for a grid with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hbar mismatch: {0} vs {1}")]
    HbarMismatch(f64, f64),
    #[error("source is not in L^2_(1/w) (infrared class {0}); the state or dynamics is undefined")]
    SourceNotAdmissible(String),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NonHermitian(f64),
    #[error("not enough usable data points: {have} < {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("grid quadrature self-check failed: relative error {0:e}")]
    Calibration(f64),
    #[error("truncation inadequate: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
