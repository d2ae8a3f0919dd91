use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ringsqueeze::Execution;
use ringsqueeze_cli::{execute, Command, Invocation, Options};

#[derive(Parser)]
#[command(name = "ringsqueeze", version, about = "Reservoir-engineered squeezing of collective atomic modes in a ring cavity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for the JSON and CSV reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Fidelity threshold for a zero exit status (default 0.99 or the config value).
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Leave the timestamp out of the JSON report.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Run a squeezing protocol and score it against its target state.
    Protocol,
    /// Stationary state of a fixed drive, with an optional stability sweep.
    SteadyState,
    /// Covariance time series from vacuum under a fixed drive.
    Evolve,
    /// Overlap matrix of the collective modes for a chain geometry.
    Modes,
    /// Compare Gaussian evolution with a truncated Fock-space integration.
    Oracle,
    /// Run many protocol configs in parallel.
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Protocol => Command::Protocol,
            Cmd::SteadyState => Command::SteadyState,
            Cmd::Evolve => Command::Evolve,
            Cmd::Modes => Command::Modes,
            Cmd::Oracle => Command::Oracle,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let inv = Invocation {
        command: cli.command.into(),
        config,
        out: cli.out,
        timestamp: !cli.no_timestamp,
        options: Options {
            threshold: cli.threshold,
            exec: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
        },
    };
    ExitCode::from(execute(&inv))
}
