//! Command-line front end of the `randset` binary.

pub mod config;
pub mod expr;
pub mod output;
pub mod run;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_config_str, OutputFormat, ScenarioConfig};
pub use run::{run, RunReport};

#[derive(Debug, Parser)]
#[command(name = "randset", version, about = "Random-set uncertainty propagation through PDE models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides `propagation.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Worker threads for the sample loop.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenpairs of the exponential covariance.
    KlTable {
        #[arg(long)]
        ell: Option<f64>,
        #[arg(long)]
        terms: Option<usize>,
        /// Interval endpoints, e.g. `--domain -1 1`.
        #[arg(long, num_args = 2, allow_hyphen_values = true)]
        domain: Option<Vec<f64>>,
    },
    /// Realizations of the random field.
    SampleField,
    /// One membrane solve.
    Elliptic,
    /// One transport solve.
    Transport,
    /// One rod-wave solve.
    Wave,
    /// Random-set propagation: p-box, intervals, mean field.
    Propagate,
    /// Random-set versus parametric bounds.
    Compare,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
