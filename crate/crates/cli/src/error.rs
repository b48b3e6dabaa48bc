use qkolab_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Cap(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Cap(_) => EXIT_CAP,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::CapExceeded(_) => CliError::Cap(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
