//! `cardioload` — score heart-rate minutes into Cardio Load, maintain the
//! adaptive weekly target, synthesize scenarios, and export plot data.
//!
//! Subcommands:
//!
//! - `compute`: minute samples (+ optional workout sessions) → daily
//!   summaries CSV, with an ingest report printed to stdout.
//! - `target`: daily or weekly history + persisted state JSON → per-week
//!   target trace CSV and the updated state.
//! - `simulate`: named scenario → generated inputs, end-to-end outputs, and
//!   a manifest with content digests.
//! - `plot`: plot-ready CSV series (intensity curve, one day, weekly trace).
//!
//! Exit codes are part of the contract: 0 success, 2 unreadable or
//! unparseable input, 3 invalid profile/config/timezone, 4 a weekly history
//! the engine cannot repair, 5 unknown scenario.

mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

/// Errors carrying their contractual exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: missing, unreadable, or unparseable input data.
    Input(String),
    /// Exit 3: invalid profile, config file, or timezone.
    Config(String),
    /// Exit 4: weekly history or persisted state the engine cannot repair.
    History(String),
    /// Exit 5: scenario name not in the catalogue.
    UnknownScenario(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::History(_) => 4,
            CliError::UnknownScenario(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::History(msg) => write!(f, "{msg}"),
            CliError::UnknownScenario(name) => write!(
                f,
                "unknown scenario \"{name}\" (expected constant, step_down, step_up, spike, or fig2_day)"
            ),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cardioload",
    version,
    about = "Cardio Load scoring and adaptive weekly target tracking",
    after_help = "Exit codes: 0 success, 2 bad input, 3 bad profile/config, \
                  4 irreparable history, 5 unknown scenario."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a minute stream into daily Cardio Load summaries
    Compute(ComputeArgs),
    /// Update the weekly Cardio Load Target from accumulated history
    Target(TargetArgs),
    /// Generate a named scenario and run the pipeline end to end
    Simulate(SimulateArgs),
    /// Emit plot-ready CSV series
    Plot(PlotArgs),
}

#[derive(Args)]
pub struct ComputeArgs {
    /// User profile JSON
    #[arg(long)]
    pub profile: PathBuf,
    /// Minute samples CSV (timestamp,hr_bpm,moving,worn)
    #[arg(long)]
    pub minutes: PathBuf,
    /// Workout sessions CSV; omit to file every minute as incidental
    #[arg(long)]
    pub workouts: Option<PathBuf>,
    /// IANA timezone defining day boundaries
    #[arg(long, default_value = "UTC")]
    pub timezone: String,
    /// Config JSON overriding scoring/target defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path for the daily summaries CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("history").required(true).args(["daily", "weekly"])
))]
pub struct TargetArgs {
    /// Daily summaries CSV to bucket into calendar weeks
    #[arg(long)]
    pub daily: Option<PathBuf>,
    /// Weekly history CSV (week_start,total_load,observed_days)
    #[arg(long)]
    pub weekly: Option<PathBuf>,
    /// State JSON: read when present, written back after the fold
    #[arg(long)]
    pub state: PathBuf,
    /// Config JSON overriding scoring/target defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path for the per-week target trace CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario name: constant, step_down, step_up, spike, or fig2_day
    pub scenario: String,
    /// Length of weekly scenarios, in weeks
    #[arg(long, default_value_t = 18)]
    pub weeks: u32,
    /// Seed for the day synthesizer (fig2_day defaults to its frozen plan)
    #[arg(long)]
    pub seed: Option<u64>,
    /// IANA timezone defining day boundaries
    #[arg(long, default_value = "UTC")]
    pub timezone: String,
    /// Config JSON overriding scoring/target defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving the generated tree
    #[arg(long, default_value = "sim_out")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PlotArgs {
    #[command(subcommand)]
    pub kind: PlotKind,
}

#[derive(Subcommand)]
pub enum PlotKind {
    /// Per-minute load versus %HRR for both sex coefficients
    #[command(name = "minute_curve")]
    MinuteCurve {
        /// Config JSON overriding scoring defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV (pct_hrr,load_male,load_female)
        #[arg(long)]
        out: PathBuf,
    },
    /// Scored minutes of one computed day
    Day {
        /// User profile JSON
        #[arg(long)]
        profile: PathBuf,
        /// Minute samples CSV
        #[arg(long)]
        minutes: PathBuf,
        /// Workout sessions CSV
        #[arg(long)]
        workouts: Option<PathBuf>,
        /// Config JSON overriding scoring defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV (timestamp,pct_hrr,load,in_workout)
        #[arg(long)]
        out: PathBuf,
    },
    /// Weekly loads with rolling statistics and target
    #[command(group(
        ArgGroup::new("history").required(true).args(["daily", "weekly"])
    ))]
    Weeks {
        /// Daily summaries CSV to bucket into calendar weeks
        #[arg(long)]
        daily: Option<PathBuf>,
        /// Weekly history CSV
        #[arg(long)]
        weekly: Option<PathBuf>,
        /// Prior state JSON to fold on top of (defaults to a fresh state)
        #[arg(long)]
        state: Option<PathBuf>,
        /// Config JSON overriding scoring/target defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV (week_start,weekly_cl,rm,ewma,target)
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => commands::compute(&args),
        Command::Target(args) => commands::target(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Plot(args) => commands::plot(&args.kind),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
