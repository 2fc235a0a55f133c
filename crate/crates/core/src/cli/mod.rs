//! Command-line front end: scenario files, ratings ingestion, selection and
//! assignment runs, property suites, the sampling experiment and worst-case
//! instance export.

mod commands;
pub mod ratings;
pub mod scenario_file;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{experiment_rows, ExperimentRow};
pub use scenario_file::ScenarioFile;

use crate::error::Error;
use crate::utility::DEFAULT_BUDGET;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

/// Environment variable overriding the enumeration budget.
pub const BUDGET_ENV: &str = "TESTSCORE_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "testscore", version, about = "Test-score team selection and project assignment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pick the k agents with the largest test scores for one project.
    Select(SelectArgs),
    /// Greedily assign agents to projects using replication scores.
    Assign(AssignArgs),
    /// Run a property suite over generated instances.
    Check(CheckArgs),
    /// Turn a ratings CSV into a best-shot scenario of empirical distributions.
    Ingest(IngestArgs),
    /// Sample teams of coders and compare greedy selection with the optimum.
    Experiment(ExperimentArgs),
    /// Emit a named worst-case instance, optionally running and checking it.
    Worstcase(WorstcaseArgs),
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    pub scenario: PathBuf,
    /// Project name or index.
    #[arg(long, default_value = "0")]
    pub project: String,
    /// Team size; defaults to the project's k.
    #[arg(long)]
    pub k: Option<usize>,
    /// mean, quantile:<level> or replication.
    #[arg(long, default_value = "replication")]
    pub scores: String,
    /// Also compute the exact optimum and the approximation ratio.
    #[arg(long)]
    pub oracle: bool,
    /// Seed for Monte Carlo fallbacks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub oracle: bool,
    /// Break exact ties uniformly at random from this seed instead of by id.
    #[arg(long)]
    pub random_ties: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// submodularity, bsp, sketch, goodness or adversarial.
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of generated instances; each suite has its own default.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub ratings: PathBuf,
    /// Keep coders with at least this many ratings.
    #[arg(long, default_value_t = 10)]
    pub min_solutions: usize,
    /// Team size written into the scenario template.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub scenario: PathBuf,
    /// Coders sampled per trial.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Team sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WorstcaseArgs {
    /// Generator name.
    pub name: String,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    /// Run the algorithms and check the expected quantities.
    #[arg(long)]
    pub run: bool,
    /// Write the instance as a scenario file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn property(message: impl Into<String>) -> Self {
        CliError { code: EXIT_PROPERTY, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_budget() { EXIT_BUDGET } else { EXIT_VALIDATION };
        CliError { code, message: e.to_string() }
    }
}

/// Budget from [`BUDGET_ENV`] when set, else the library default.
pub fn budget_from_env() -> Result<u64, CliError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{BUDGET_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
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
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
