//! Error taxonomy shared across the workspace.
//!
//! Two failure classes matter operationally: *usage* errors (bad arguments,
//! malformed configs, violated preconditions) and *numerical* failures
//! (non-finite iterates, step-size underflow, non-convergent subroutines).
//! The CLI maps them to distinct exit codes so scripts can branch on the
//! failure class.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Caller violated a precondition or supplied an invalid argument.
    #[error("usage error: {0}")]
    Usage(String),
    /// A computation produced non-finite values or failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code for this failure class (1 usage, 2 numerical).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Numerical(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
