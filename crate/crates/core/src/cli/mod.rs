//! Batch front end: `elastic-tr <command> --config run.toml --out DIR`.
//!
//! Exit codes: 0 on success, 2 for configuration problems (the message names
//! the offending key), 3 for solver failures.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{Kind, Metrics};
pub use config::{ConfigFile, PhantomSource, ReconstructionSettings, Section, SweepSpec, VisibilitySettings};
pub use output::{num, sha256_hex};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "elastic-tr", version, about = "Elastic-wave time reversal and Neumann-series reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate boundary data from a phantom.
    Forward(CommonArgs),
    /// Recover the initial displacement from boundary data.
    Reconstruct(CommonArgs),
    /// Certify the visibility condition by ray tracing.
    Visibility(CommonArgs),
    /// Assemble the small-grid matrix oracle and measure the error operator.
    Oracle(CommonArgs),
    /// Repeat a command over a list of values of one configuration key.
    Sweep(CommonArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Progress on stderr.
    #[arg(long)]
    pub verbose: bool,
}

/// 2 for configuration errors, 3 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig { .. } => 2,
        _ => 3,
    }
}

pub fn run(cli: &Cli) -> Result<Metrics> {
    let (name, args) = match &cli.command {
        Command::Forward(a) => ("forward", a),
        Command::Reconstruct(a) => ("reconstruct", a),
        Command::Visibility(a) => ("visibility", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Sweep(a) => ("sweep", a),
    };
    if args.jobs == 0 {
        return Err(Error::config("--jobs", "must be at least 1"));
    }
    let cfg = ConfigFile::load(&args.config).map_err(|e| match e {
        Error::Io { .. } => Error::config("--config", e.to_string()),
        e => e,
    })?;
    let verbose = args.verbose;
    let log = move |msg: &str| {
        if verbose {
            eprintln!("{msg}");
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::config("--jobs", e.to_string()))?;
    pool.install(|| match name {
        "sweep" => commands::sweep(&cfg, &args.out, &log),
        other => Kind::parse(other).expect("known command").run(&cfg, &args.out, &log),
    })
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
