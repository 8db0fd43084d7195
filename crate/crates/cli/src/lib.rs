//! Library half of the `openenv` command-line driver: configuration,
//! pipeline orchestration, and report emission.

pub mod config;
pub mod pipeline;

pub use config::{Cli, ModelKind, RunConfig, TaskKind};

/// Errors classified by exit code: 2 for configuration problems, 3 for
/// data and pipeline failures.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] openenv_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

/// Parse-validate-execute entry point used by `main`.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::from_cli(cli)?;
    pipeline::execute(&config)
}
