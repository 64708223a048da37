mod args;
mod commands;
mod error;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use casimir_core::Settings;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use output::RunManifest;

fn init_threads(threads: usize) -> Result<(), CliError> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    Ok(())
}

fn execute(command: &Command, settings: &Settings, out: &Path) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let outputs = commands::run(command, settings, out)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: command.name().to_string(),
        command: command.clone(),
        config: settings.clone(),
        outputs: outputs
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.write(out)
}

fn dispatch(cli: Cli) -> Result<PathBuf, CliError> {
    match &cli.command {
        Command::Replay(r) => {
            let manifest = RunManifest::load(&r.manifest)?;
            init_threads(r.threads)?;
            let out = match &r.out {
                Some(o) => o.clone(),
                None => r.manifest.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
            };
            execute(&manifest.command, &manifest.config, &out)
        }
        command => {
            let common = command.common().expect("non-replay command");
            init_threads(common.threads)?;
            let settings = Settings::load(&common.config)?;
            let settings = commands::merge_overrides(settings, common);
            let command = commands::absolutize(command);
            execute(&command, &settings, &common.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(manifest) => {
            log::info!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
