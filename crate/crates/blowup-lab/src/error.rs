//! Crate-wide error type and the exit-code mapping used by the CLI.

use thiserror::Error;

/// Everything that can go wrong while building or interrogating a solution.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or malformed request (bad dimension, non-positive
    /// tolerance, odd panel count, ...). CLI exit code 2.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A structurally valid request outside the domain of definition
    /// (evaluation past the blowup guard, z beyond the computed profile, ...).
    /// CLI exit code 2.
    #[error("out of domain: {0}")]
    Domain(String),

    /// Numerical failure inside an integrator or quadrature (step-size
    /// underflow, non-finite state). CLI exit code 3.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Filesystem failure while writing reports. CLI exit code 4.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error per the documented CLI mapping
    /// (0 pass, 1 verification failure, 2 config, 3 numeric, 4 i/o).
    /// Verification failure is not an `Error`: a verify run that completes
    /// with failing checks returns a report, and the CLI maps it to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Numeric(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
