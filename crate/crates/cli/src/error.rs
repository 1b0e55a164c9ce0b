use meancount_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
    /// Output was written but some result did not converge.
    #[error("{0}")]
    NonConverged(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGED: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Config(_) | CliError::Io(_) => EXIT_INVALID,
            CliError::NonConverged(_) => EXIT_NONCONVERGED,
            CliError::Core(e) => match e {
                Error::NonConverged { .. }
                | Error::RouteMismatch { .. }
                | Error::Truncation { .. }
                | Error::BoundViolation { .. } => EXIT_NONCONVERGED,
                Error::RejectedRange { .. }
                | Error::RejectedMean { .. }
                | Error::NonzeroConstant { .. }
                | Error::BoundaryZero { .. }
                | Error::WEqualsNu
                | Error::Domain { .. }
                | Error::InvalidArgument(_) => EXIT_INVALID,
            },
        }
    }
}
