//! Command-line front end: `simulate`, `meanfield`, `boundary` and `sweep`.
//!
//! Exit status is 0 on success, 1 for configuration errors, 2 for numerical
//! failures and 3 for I/O errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::execute;
pub use config::{
    parse_config, resolve, BoundaryOptions, Command, GridRange, MeanFieldOptions, OutputOptions, Overrides, RunConfig,
    SweepSpec,
};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "duopoly", version, about = "Two sellers of perishable goods competing for buyers")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Sweep worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Choice temperature.
    #[arg(long = "T", global = true, value_name = "REAL")]
    temperature: Option<f64>,
    /// Greed, the weight of price against freshness.
    #[arg(long = "g", global = true, value_name = "REAL")]
    greed: Option<f64>,
    #[arg(long, global = true, value_name = "REAL")]
    duration: Option<f64>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Agent-based run; writes timeseries.csv.
    Simulate,
    /// Deterministic mean-field run; writes meanfield.csv and q_curve.csv.
    Meanfield,
    /// Analytic boundaries; writes boundary.csv and critical.csv.
    Boundary,
    /// Phase table over a (T, g) grid; writes sweep.csv.
    Sweep {
        #[arg(long = "T-range", value_name = "LO:HI:COUNT")]
        temperature_range: Option<GridRange>,
        #[arg(long = "g-range", value_name = "LO:HI:COUNT")]
        greed_range: Option<GridRange>,
    },
}

fn run(cli: Cli) -> Result<String> {
    let mut overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
        temperature: cli.temperature,
        greed: cli.greed,
        duration: cli.duration,
        svg: cli.svg,
        ..Overrides::default()
    };
    let command = match cli.command {
        Sub::Simulate => Command::Simulate,
        Sub::Meanfield => Command::Meanfield,
        Sub::Boundary => Command::Boundary,
        Sub::Sweep { temperature_range, greed_range } => {
            overrides.temperature_range = temperature_range;
            overrides.greed_range = greed_range;
            Command::Sweep
        }
    };
    let text = match &cli.config {
        Some(path) => Some(
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let cfg = resolve(text.as_deref(), &overrides, command)?;
    execute(&cfg)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Messages go to stdout and stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
