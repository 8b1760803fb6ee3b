use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use residence_cli::commands;
use residence_cli::{CommandKind, Settings};

#[derive(Parser)]
#[command(
    name = "residence",
    version,
    about = "Residence-time estimation by regularized deconvolution"
)]
struct Cli {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate rainfall, a ground-truth kernel and a noisy output.
    Simulate(Settings),
    /// Estimate a kernel at a fixed lambda or with a selection strategy.
    Estimate(Settings),
    /// Cross-correlation baseline estimate.
    Xcorr(Settings),
    /// Solve over a lambda grid and report every selection strategy.
    Sweep(Settings),
    /// Monte-Carlo benchmark over noise levels and series lengths.
    Bench(Settings),
    /// Replay a run from its manifest.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> residence_cli::Result<String> {
    let (kind, flags) = match cli.command {
        Command::Rerun { manifest, out } => return commands::rerun(&manifest, out),
        Command::Simulate(s) => (CommandKind::Simulate, s),
        Command::Estimate(s) => (CommandKind::Estimate, s),
        Command::Xcorr(s) => (CommandKind::Xcorr, s),
        Command::Sweep(s) => (CommandKind::Sweep, s),
        Command::Bench(s) => (CommandKind::Bench, s),
    };
    let settings = match &cli.config {
        Some(path) => flags.over(Settings::from_file(path)?),
        None => flags,
    };
    commands::run(kind, &settings)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
