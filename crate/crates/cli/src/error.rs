//! CLI error type with process exit codes: 1 for input/validation
//! problems, 2 for runtime failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] httl_core::ConfigError),
    #[error(transparent)]
    Validation(#[from] httl_core::ValidationError),
    #[error(transparent)]
    Oracle(#[from] httl_core::OracleError),
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Integrate(#[from] httl_core::IntegrateError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Exit code: validation problems return 1, runtime failures 2.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::Validation(_)
            | CliError::Oracle(_)
            | CliError::BadArgument(_) => 1,
            CliError::Integrate(httl_core::IntegrateError::ResolutionTooSmall { .. }) => 1,
            CliError::Integrate(_) | CliError::Io { .. } | CliError::Runtime(_) => 2,
        }
    }
}
