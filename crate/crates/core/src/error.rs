use thiserror::Error;

/// Errors raised by the numerical and geometric routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge (last estimate {estimate:e})")]
    NonConvergence { what: &'static str, estimate: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),

    #[error("s = {s} outside the domain [{lo}, {hi}]")]
    OutOfDomain { s: f64, lo: f64, hi: f64 },

    #[error("non-spacelike data at s = {s}: |q Du| = {value}")]
    NonSpacelike { s: f64, value: f64 },

    #[error("{label} is not spacelike: |v| = {norm} >= 1")]
    NotInUnitBall { label: String, norm: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure_finite(label: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(label.to_string()))
    }
}
