//! Crate-wide error type.
//!
//! Errors fall into two classes that map onto the CLI exit codes: validation
//! errors (bad inputs, malformed config or CSV, exit code 1) and numerical
//! failures (fit divergence, lock-loop instability, exit code 2).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error class, used for exit codes and machine-readable error lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Numerical => "numerical",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or inconsistent input data.
    #[error("{0}")]
    Validation(String),

    /// Config file parse or validation error, with the offending line.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// CSV format error, with the offending data row (1-based, header excluded).
    #[error("{path} row {row}: {message}")]
    Csv {
        path: String,
        row: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A nonlinear fit ran out of iterations. Carries the best parameters
    /// seen so far and their rms residual.
    #[error(
        "fit did not converge after {iterations} iterations \
         (best rms residual {rms_residual:.6e}, best parameters {params:?})"
    )]
    FitNotConverged {
        iterations: usize,
        rms_residual: f64,
        params: Vec<f64>,
    },

    /// The simulated lock loop diverged.
    #[error(
        "lock loop unstable at sample {at_sample}: |residual| = {excursion_m:.3e} m \
         exceeds a quarter free spectral range (kp = {kp}, ki = {ki_per_s} 1/s)"
    )]
    LockUnstable {
        at_sample: usize,
        excursion_m: f64,
        kp: f64,
        ki_per_s: f64,
    },
}

impl Error {
    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation(_) | Error::Config { .. } | Error::Csv { .. } | Error::Io(_) => {
                ErrorKind::Validation
            }
            Error::FitNotConverged { .. } | Error::LockUnstable { .. } => ErrorKind::Numerical,
        }
    }

    /// Process exit code for the CLI: 1 for validation errors, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation => 1,
            ErrorKind::Numerical => 2,
        }
    }
}
