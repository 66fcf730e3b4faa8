//! `spectral-drop <command> --config <path> [--output-dir <path>] [--threads N]`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use log::{error, info};

use crate::config::{RunConfig, CONFIG_HELP};
use crate::error::{exit_code, Invalid, EXIT_OK};
use crate::output::RunInfo;
use crate::run::Command;

#[derive(Parser, Debug)]
#[command(name = "spectral-drop", version, about = "Laplace eigenvalue drops in a container: solve, optimize, sweep, drift, diagnose, export", after_help = CONFIG_HELP)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory; overrides `output_dir` in the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for sweep and drift.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SPECTRAL_DROP_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(Invalid::new("--threads must be at least 1").into());
    }
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Invalid::new(format!("reading {}: {e}", cli.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    let dir = cli
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = cfg.solver.seed;
    let prepared = run::prepare(cli.command, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("building the worker pool")?;
    let info = RunInfo {
        command: cli.command.as_str(),
        config_text: &text,
        seed,
        threads: cli.threads,
    };
    match run::execute(&prepared, &pool) {
        Ok(artifacts) => {
            let files = output::commit(&dir, &info, &artifacts, None)?;
            info!("wrote {} files to {}", files.len(), dir.display());
            Ok(())
        }
        Err(e) => {
            // solver failures leave a manifest describing the attempt
            if exit_code(&e) == error::EXIT_SOLVER {
                output::commit(&dir, &info, &output::Artifacts::default(), Some(format!("{e:#}")))?;
            }
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
