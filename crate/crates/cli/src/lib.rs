//! Command-line harness for `magspec-core`: configuration, experiment
//! dispatch and reproducible CSV/JSON artifacts.

pub mod args;
pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;

pub use args::Cli;
pub use artifact::{Check, RunArtifact, Table};
pub use config::{resolve, RunConfig};
pub use error::{CliError, CliResult};

/// Resolves the configuration of a parsed command line, runs it and emits
/// the artifact.
pub fn execute(cli: &Cli) -> CliResult<RunArtifact> {
    let file = match cli.command.config_path() {
        Some(path) => config::load_config_file(path)?,
        None => Default::default(),
    };
    let cfg = resolve(cli.command.name(), file, cli.command.flags())?;
    log::debug!("resolved config: {cfg}");
    let artifact = commands::run(&cfg)?;
    for path in artifact.emit()? {
        log::info!("wrote {}", path.display());
    }
    Ok(artifact)
}
