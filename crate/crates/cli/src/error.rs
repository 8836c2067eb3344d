use magspec_core::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical check failed: {0}")]
    Check(String),

    #[error("infeasible model: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Core(#[from] magspec_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit code: 2 config, 3 numerical check, 4 infeasible model, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Infeasible => 4,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
