// Negated comparisons (`!(x > 0.0)`) are NaN-rejecting guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Library half of the `gpfast` binary: the benchmark harness ([`bench`])
//! and the warped-signal inference demo ([`demo`]), both writing CSV.
//!
//! Errors carry their process exit code: 1 usage, 2 numerical, 3 I/O.

use gpfast::{EssError, KernelError, LinAlgError};

pub mod bench;
pub mod demo;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration (exit code 1).
    Usage(String),
    /// A numerical routine failed, e.g. loss of positive definiteness
    /// (exit code 2).
    Numerical(String),
    /// Filesystem or CSV failure (exit code 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LinAlgError> for CliError {
    fn from(e: LinAlgError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<EssError> for CliError {
    fn from(e: EssError) -> Self {
        match e {
            EssError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
