//! `secrecy`: capacity certificates, power sweeps, and oracle reports for the
//! 2-2-1 Gaussian MIMO wiretap channel.

mod commands;
mod io;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::io::CliError;

#[derive(Debug, Parser)]
#[command(name = "secrecy", version, about = "Secrecy capacity of the 2-2-1 Gaussian MIMO wiretap channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the capacity certificate of a channel as JSON.
    Capacity(CapacityArgs),
    /// Sweep the power budget and print one CSV row per value.
    Sweep(SweepArgs),
    /// Check the closed forms against grid search.
    Oracle(OracleArgs),
    /// Print seeded random general channels, one JSON document per line.
    Random(RandomArgs),
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Channel spec file, or `-` for stdin.
    pub path: String,
    /// Report `capacity` in bits.
    #[arg(long, conflicts_with = "nats")]
    pub bits: bool,
    /// Report `capacity` in nats (default).
    #[arg(long)]
    pub nats: bool,
    /// Relative tolerance for the tightness verdict; overrides SECRECY_TOL.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub path: String,
    #[arg(long)]
    pub pmin: f64,
    #[arg(long)]
    pub pmax: f64,
    #[arg(long)]
    pub steps: usize,
    /// Space the powers geometrically instead of linearly.
    #[arg(long)]
    pub log_spacing: bool,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub path: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Correlations sampled from the unit disk.
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            CliError::usage(e.to_string().trim_end()).emit();
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Capacity(args) => commands::capacity(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Oracle(args) => commands::oracle(&args),
        Command::Random(args) => commands::random(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            e.emit();
            ExitCode::from(1)
        }
    }
}
