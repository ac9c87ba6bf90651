use thiserror::Error;

/// Failures surfaced by the harness, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid experiment file, or bad overrides. Exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// A run or an output write failed. Exit code 1.
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl From<fairfed::Error> for CliError {
    fn from(e: fairfed::Error) -> Self {
        match e {
            fairfed::Error::Config { .. } => CliError::Config(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
