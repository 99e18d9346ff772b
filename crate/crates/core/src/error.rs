use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {column} is constant (centered second moment {moment:e})")]
    DegenerateColumn { column: usize, moment: f64 },

    #[error("Gram matrix is singular or ill-conditioned (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error("diagonal block of group {group} is singular (reciprocal condition {rcond:e})")]
    SingularBlock { group: usize, rcond: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("sample size n = {n} must exceed dimension d = {d}")]
    Rank { n: usize, d: usize },

    #[error("degenerate sample: eigenvalue {eigenvalue:e} of the sample covariance is below 1e-12")]
    DegenerateSample { eigenvalue: f64 },

    #[error("coordinate descent did not converge after {sweeps} sweeps (last change {change:e})")]
    NonConvergence {
        sweeps: usize,
        change: f64,
        last: Vec<f64>,
    },

    #[error("{count} splits exceed the enumeration cap of {cap}")]
    TooManySplits { count: String, cap: u64 },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("leave-one-out fit without row {row}: {source}")]
    LeaveOneOut {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config { .. } | Error::Parse { .. } => 2,
            Error::TooManySplits { .. } => 4,
            Error::Replicate { source, .. } | Error::LeaveOneOut { source, .. } => {
                source.exit_code()
            }
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
