use rdrestore_core::pgm::PgmError;
use rdrestore_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::CflViolation { .. }
            | CoreError::NumericalAbort { .. }
            | CoreError::GrowthBoundViolated { .. } => CliError::Numerical(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<PgmError> for CliError {
    fn from(e: PgmError) -> Self {
        CliError::Io(e.to_string())
    }
}
