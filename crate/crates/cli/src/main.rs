//! `plc`: simulate, classify, fit and draw phase portraits of the PLC model
//! of language change.
//!
//! Exit codes: 0 success, 2 invalid usage or input, 3 numerical failure.

mod commands;
mod data;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plc_core::PlcError;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const USAGE: u8 = 2;
    pub const NUMERIC: u8 = 3;

    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: Self::NUMERIC,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<PlcError> for CliError {
    fn from(e: PlcError) -> Self {
        match e {
            PlcError::StepUnderflow { .. } | PlcError::DegenerateSaddle | PlcError::Undecided(_) => {
                Self::numeric(e.to_string())
            }
            _ => Self::input(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "plc", version, about = "Progressive/liberal/conservative model of language change")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory and report its fate.
    Simulate(SimulateArgs),
    /// Regime, critical points, stability and long-term outcomes.
    Classify(ClassifyArgs),
    /// Fit model families to a `t,value` time series.
    Fit(FitArgs),
    /// Nullclines, separatrix and a basin grid as CSV files.
    Portrait(PortraitArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    /// Treat the four rates as raw propensities of a population of this size.
    #[arg(long)]
    pub population: Option<f64>,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// JSON report path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print numbers with full precision instead of 6 significant digits.
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    /// Fixed end time; by default integration runs until the fate is decided.
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Relative local error tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    /// Absolute local error tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    /// Trajectory CSV (`t,x,y`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    Pa,
    K2,
    K3,
    Plc,
    All,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// CSV with a `t,value` header (or a single column of values).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::All)]
    pub family: FamilyArg,
    /// Also fit without the last K points and predict them.
    #[arg(long)]
    pub holdout: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub multistart: usize,
    /// Multistart seed.
    #[arg(long, env = "PLC_SEED")]
    pub seed: Option<u64>,
    /// Allow one of beta < alpha, delta < gamma in PLC fits.
    #[arg(long)]
    pub allow_negative: bool,
    /// Input values are percentages.
    #[arg(long)]
    pub percent: bool,
    /// Write dense fitted curves to this CSV.
    #[arg(long)]
    pub emit_curve: Option<PathBuf>,
    /// Number of points of the emitted curves.
    #[arg(long, default_value_t = 201)]
    pub curve_points: usize,
    /// Run the multistart on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Grid resolution: points `(i/n, j/n)` with `i + j <= n`.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Arc-length budget per separatrix branch.
    #[arg(long, default_value_t = 4.0)]
    pub arc_length: f64,
    /// Directory for nullclines.csv, separatrix.csv and grid.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Portrait(a) => commands::portrait(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
