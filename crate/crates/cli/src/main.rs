//! `revtone`: density tables, spectra and convergence sweeps for convex
//! surfaces of revolution.

mod commands;
mod config;
mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Failure, EXIT_CONFIG};
use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "revtone",
    version,
    about = "Equator restriction measures on surfaces of revolution"
)]
struct Cli {
    /// Configuration file with `section.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `run.out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// One of validate, density, spectrum, converge, verify-sphere
    /// (overrides `run.command`).
    #[arg(long)]
    command: Option<String>,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("REVTONE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Failure::config(format!(
            "REVTONE_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::config(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(name) = &cli.command {
        cfg.command = Some(name.parse::<Command>().map_err(Failure::config)?);
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    let cmd = cfg
        .command
        .ok_or_else(|| Failure::config("no command given (use --command or run.command)"))?;
    commands::run(cmd, &cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("revtone: {}", f.message);
            ExitCode::from(u8::try_from(f.code).unwrap_or(EXIT_CONFIG as u8))
        }
    }
}
