//! `sfio`: apply, verify and simulate Fourier integral operators from a TOML config.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "sfio", version, about = "Fourier integral operators with deterministic or random phase and amplitude")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed for Monte Carlo runs; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Seminorms, homogeneity, M_α membership and amplitude class checks.
    Verify,
    /// Evaluate A[ψ] (or its transpose) on the output grid.
    Apply,
    /// Variable-speed transport solution with its characteristic oracle.
    Transport,
    /// Half-wave propagator through the eikonal phase.
    Halfwave,
    /// Constant-speed wave equation, expected field under a random speed.
    Wave,
    /// Monte Carlo statistics of the random-speed wave field.
    Mc,
    /// Seminorm distance of an operator sequence to its limit.
    Converge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Apply => "apply",
            Command::Transport => "transport",
            Command::Halfwave => "halfwave",
            Command::Wave => "wave",
            Command::Mc => "mc",
            Command::Converge => "converge",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = commands::Run {
        command: cli.command,
        config_path: cli.config,
        out: cli.out,
        seed: cli.seed,
        workers: cli.workers,
        format: cli.format,
    };
    match run.execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
