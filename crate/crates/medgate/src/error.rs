use medgate_core::Error as CoreError;

/// Failure classes with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unknown names, unreadable input.
    #[error("{0}")]
    Usage(String),
    /// Input parsed but violates a numerical contract (not unitary, ...).
    #[error("{0}")]
    Numerical(String),
    /// `--require-converged` was set and the search did not converge.
    #[error("{0}")]
    NotConverged(String),
    #[error(transparent)]
    Io(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotUnitary(_)
            | CoreError::NotHermitian(_)
            | CoreError::NotNormalized(_)
            | CoreError::NonFinite => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
