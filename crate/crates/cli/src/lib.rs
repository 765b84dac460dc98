//! Experiment driver for `sympara-core`: reads a flat config file, runs one
//! subcommand, writes CSV tables.
//!
//! Exit codes: 0 success (a parareal run that does not converge is still a
//! success), 2 configuration or usage error, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod csv;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sympara_core::Schedule;

use crate::config::{ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Missing(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] sympara_core::Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sympara",
    version,
    about = "Symplectic splitting integrators and two-level parareal"
)]
pub struct Cli {
    /// Worker threads for the parareal fine sweep; results do not depend on it.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one scheme; writes trajectory.csv.
    Integrate(RunArgs),
    /// Run parareal; writes defects.csv and nodes.csv.
    Parareal(RunArgs),
    /// Compare coarse-scheme candidates; writes compare.csv.
    Compare(RunArgs),
    /// Estimate the convergence order; writes order.csv.
    Order(RunArgs),
    /// List the built-in schemes.
    Schemes,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,

    /// Output directory; overrides `output` in the config, default `.`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let args = match &cli.command {
        Command::Schemes => {
            print!("{}", commands::cmd_schemes().emit());
            return Ok(());
        }
        Command::Integrate(a) | Command::Parareal(a) | Command::Compare(a) | Command::Order(a) => a,
    };
    let cfg = load_config(&args.config)?;
    let schedule = Schedule::with_threads(cli.threads)?;
    let output = match &cli.command {
        Command::Integrate(_) => commands::cmd_integrate(&cfg)?,
        Command::Parareal(_) => commands::cmd_parareal(&cfg, &schedule)?,
        Command::Compare(_) => commands::cmd_compare(&cfg, &schedule)?,
        Command::Order(_) => commands::cmd_order(&cfg)?,
        Command::Schemes => unreachable!(),
    };
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let written = write_outputs(&dir, &output.files)?;
    println!("{}", output.summary);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

fn write_outputs(dir: &Path, files: &[(String, csv::Table)]) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, table) in files {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| io(&path, e))?;
        f.write_all(table.emit().as_bytes()).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
