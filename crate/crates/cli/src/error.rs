//! CLI failures and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or a hypothesis the run refuses to ignore.
    #[error("{0}")]
    Validation(String),
    /// The computation ran but did not converge, or produced invalid data.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<sturmian::Error> for CliError {
    fn from(e: sturmian::Error) -> Self {
        use sturmian::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::InsufficientQuotients { .. }
            | E::Hypothesis(_)
            | E::OutOfRange { .. }
            | E::RealShift(_) => CliError::Validation(e.to_string()),
            E::NonFinite { .. } | E::ZeroMatrix | E::NoConvergence(_) | E::Overflow(_) | E::ChildCount { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
