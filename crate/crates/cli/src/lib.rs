//! Command-line front end: reads a TOML config, runs one command and writes
//! a JSON summary plus an optional CSV table into the output directory.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

pub use commands::Options;
pub use config::{parse_config, RunConfig};
pub use report::{Report, Status, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] ringsqueeze::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Core(e) => Status::from(e),
            _ => Status::ConfigError,
        }
    }

    fn reason(&self) -> String {
        match self {
            CliError::Config(v) => v.join("; "),
            e => e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Protocol,
    SteadyState,
    Evolve,
    Modes,
    Oracle,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Protocol => "protocol",
            Command::SteadyState => "steady-state",
            Command::Evolve => "evolve",
            Command::Modes => "modes",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub timestamp: bool,
    pub options: Options,
}

/// Runs a parsed config; errors are returned rather than turned into reports.
pub fn run(command: Command, cfg: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    if let Some(t) = opts.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Config(vec![format!("--threshold must lie in [0, 1], got {t}")]));
        }
    }
    match command {
        Command::Protocol => commands::protocol(cfg, opts),
        Command::SteadyState => commands::steady_state(cfg, opts),
        Command::Evolve => commands::evolve(cfg, opts),
        Command::Modes => commands::modes(cfg, opts),
        Command::Oracle => commands::oracle(cfg, opts),
        Command::Sweep => commands::sweep(cfg, opts),
    }
}

fn load_and_run(inv: &Invocation) -> (Report, Value) {
    let cfg = match parse_config(&inv.config) {
        Ok(c) => c,
        Err(e) => return (Report::failed(inv.command.name(), e.status(), e.reason()), Value::Null),
    };
    let echo = serde_json::to_value(&cfg.echo).unwrap_or(Value::Null);
    match run(inv.command, &cfg, &inv.options) {
        Ok(r) => (r, echo),
        Err(e) => (Report::failed(inv.command.name(), e.status(), e.reason()), echo),
    }
}

/// Loads, runs and writes the report; returns the process exit code.
pub fn execute(inv: &Invocation) -> u8 {
    let (report, echo) = load_and_run(inv);
    match report.write(&inv.out, &echo, inv.timestamp) {
        Ok(paths) => {
            for p in &paths {
                log::info!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: cannot write report to {}: {e}", inv.out.display());
            return report.exit_code().max(Status::ConfigError.exit_code());
        }
    }
    summarize(&report, &inv.out);
    report.exit_code()
}

fn summarize(report: &Report, out: &Path) {
    let status = serde_json::to_value(report.status).ok();
    let status = status.as_ref().and_then(Value::as_str).unwrap_or("?");
    match &report.reason {
        Some(r) if report.exit_code() != 0 => eprintln!("{}: {status}: {r}", report.command),
        Some(r) => println!("{}: {status}: {r}", report.command),
        None => println!("{}: {status} ({})", report.command, out.display()),
    }
}
