use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, malformed or inconsistent configuration: exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Solver or numerical failure: exit code 2.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<twohop_core::Error> for CliError {
    fn from(e: twohop_core::Error) -> Self {
        use twohop_core::Error as E;
        match e {
            E::Parameter(_) | E::Format(_) => CliError::Usage(e.to_string()),
            E::Numerical(_) | E::NonConvergence { .. } | E::Internal(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}
