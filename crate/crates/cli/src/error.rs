use thiserror::Error;

/// Failures of a CLI run, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    /// 2 for bad configs or data, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(_) => 2,
            CliError::Io(_) | CliError::Run(_) => 1,
        }
    }
}

impl From<univinf_core::Error> for CliError {
    fn from(e: univinf_core::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
