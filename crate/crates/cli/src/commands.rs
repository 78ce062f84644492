//! Implementations behind the four subcommands. Each returns a
//! [`CliError`] whose variant fixes the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use chrono_tz::Tz;

use cardioload::domain::{
    parse_config_json, config_to_json, LoadConfig, TargetConfig, UserProfile, WorkoutSession,
    K_FEMALE, K_MALE,
};
use cardioload::ingest::{
    daily_to_csv, minutes_to_csv, parse_daily, parse_minutes, parse_weekly, parse_workouts,
    plot_day_to_csv, plot_weeks_to_csv, target_rows_to_csv, weekly_to_csv, IngestReport,
};
use cardioload::load::{
    attribute_minutes, daily_summaries, gated_load, score_minutes, DailySummary, MinuteLoadDetail,
};
use cardioload::synth::{
    gen_day, gen_week_series, sessions_for_plan, showcase_day_plan, showcase_day_plan_with_seed,
    showcase_profile, PatternKind, WeekPattern, SHOWCASE_DATE,
};
use cardioload::target::{
    fold_weeks, group_days_into_weeks, week_start_for, TargetRow, TargetState, WeeklyLoad,
};

use crate::manifest::{write_file, RunManifest};
use crate::{CliError, ComputeArgs, PlotKind, SimulateArgs, TargetArgs};

/// Calendar anchor for simulated weekly series; scenarios start on the
/// configured week-start day of this week.
const SIMULATION_EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(2024, 1, 1) {
    Some(d) => d,
    None => panic!("valid date"),
};

/// Header of the intensity-curve plot format, owned by the CLI.
const MINUTE_CURVE_HEADER: &str = "pct_hrr,load_male,load_female";

/// Points sampled per unit of %HRR span in `plot minute_curve` (0.5% steps).
const CURVE_STEPS: usize = 200;

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Effective config: defaults, overridden by `--config` when given.
/// Config problems — unreadable file included — are exit 3.
fn load_configs(path: Option<&Path>) -> Result<(LoadConfig, TargetConfig), CliError> {
    match path {
        None => Ok((LoadConfig::default(), TargetConfig::default())),
        Some(p) => {
            let raw = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            parse_config_json(&raw).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn load_profile(path: &Path) -> Result<UserProfile, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    UserProfile::from_json_str(&raw).map_err(|e| CliError::Config(e.to_string()))
}

fn parse_timezone(name: &str) -> Result<Tz, CliError> {
    name.parse::<Tz>()
        .map_err(|_| CliError::Config(format!("unknown IANA timezone \"{name}\"")))
}

fn load_sessions(path: Option<&Path>) -> Result<Vec<WorkoutSession>, CliError> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => parse_workouts(&read_input(p)?).map_err(|e| CliError::Input(e.to_string())),
    }
}

/// Reads the weekly history from whichever flag was given: `--weekly`
/// directly, or `--daily` bucketed into calendar weeks.
fn load_weeks(
    daily: Option<&Path>,
    weekly: Option<&Path>,
    config: &TargetConfig,
) -> Result<Vec<WeeklyLoad>, CliError> {
    if let Some(p) = weekly {
        return parse_weekly(&read_input(p)?).map_err(|e| CliError::Input(e.to_string()));
    }
    let p = daily.expect("clap guarantees one history flag");
    let days = parse_daily(&read_input(p)?).map_err(|e| CliError::Input(e.to_string()))?;
    group_days_into_weeks(&days, config).map_err(|e| CliError::History(e.to_string()))
}

/// Reads persisted state, or starts fresh when the file does not exist.
/// A file that exists but cannot be read or validated is exit 4: the
/// history it carried is unrecoverable.
fn load_state(path: &Path, config: &TargetConfig) -> Result<TargetState, CliError> {
    if !path.exists() {
        return Ok(TargetState::initial(config));
    }
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::History(format!("cannot read {}: {e}", path.display())))?;
    TargetState::from_json_str(&raw, config).map_err(|e| CliError::History(e.to_string()))
}

/// Runs the scoring pipeline: minutes + sessions -> attributed details.
fn score_and_attribute(
    minutes_csv: &str,
    sessions: &[WorkoutSession],
    profile: &UserProfile,
    config: &LoadConfig,
) -> Result<(Vec<MinuteLoadDetail>, IngestReport), CliError> {
    let (samples, report) =
        parse_minutes(minutes_csv).map_err(|e| CliError::Input(e.to_string()))?;
    let details = score_minutes(&samples, profile, config);
    let details =
        attribute_minutes(details, sessions).map_err(|e| CliError::Input(e.to_string()))?;
    Ok((details, report))
}

fn print_ingest_report(report: &IngestReport) {
    println!(
        "minutes: {} accepted, {} rejected",
        report.records_accepted(),
        report.records_rejected()
    );
    const SHOWN: usize = 20;
    for err in report.errors().iter().take(SHOWN) {
        println!("  line {}: {}", err.line(), err.message());
    }
    if report.errors().len() > SHOWN {
        println!("  ... and {} more", report.errors().len() - SHOWN);
    }
    if !report.gaps().is_empty() {
        println!(
            "gaps: {} spans, {} minutes synthesized as not worn",
            report.gaps().len(),
            report.minutes_synthesized()
        );
    }
}

fn print_days(days: &[DailySummary]) {
    for day in days {
        println!(
            "{}: total {:.2} (workout {:.2} + incidental {:.2}), worn {} min, {}",
            day.date(),
            day.total_load(),
            day.workout_load(),
            day.incidental_load(),
            day.worn_minutes(),
            if day.observed() { "observed" } else { "partial" }
        );
    }
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

pub fn compute(args: &ComputeArgs) -> Result<(), CliError> {
    let (load_cfg, target_cfg) = load_configs(args.config.as_deref())?;
    let tz = parse_timezone(&args.timezone)?;
    let profile = load_profile(&args.profile)?;
    let sessions = load_sessions(args.workouts.as_deref())?;

    let minutes_csv = read_input(&args.minutes)?;
    let (details, report) = score_and_attribute(&minutes_csv, &sessions, &profile, &load_cfg)?;
    let days =
        daily_summaries(&details, tz, &target_cfg).map_err(|e| CliError::Input(e.to_string()))?;

    write_output(&args.out, &daily_to_csv(&days))?;
    print_ingest_report(&report);
    print_days(&days);
    println!("wrote {} day(s) to {}", days.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// target
// ---------------------------------------------------------------------------

pub fn target(args: &TargetArgs) -> Result<(), CliError> {
    let (_, target_cfg) = load_configs(args.config.as_deref())?;
    let state = load_state(&args.state, &target_cfg)?;
    let weeks = load_weeks(args.daily.as_deref(), args.weekly.as_deref(), &target_cfg)?;

    let (state, rows) =
        fold_weeks(&state, &weeks, &target_cfg).map_err(|e| CliError::History(e.to_string()))?;

    write_output(&args.out, &target_rows_to_csv(&rows))?;
    write_output(&args.state, &state.to_json_string())?;

    let synthesized = rows.len() - weeks.len();
    println!("folded {} week(s), {} synthesized as zero", rows.len(), synthesized);
    println!("phase {}, target {:.2}", state.phase(), state.current_target());
    println!("wrote trace to {} and state to {}", args.out.display(), args.state.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    match args.scenario.as_str() {
        "constant" | "step_down" | "step_up" | "spike" => simulate_weeks(args),
        "fig2_day" => simulate_day(args),
        other => Err(CliError::UnknownScenario(other.to_string())),
    }
}

/// The logical invocation echoed into the manifest: arguments that shape
/// the data, never filesystem paths, so identical runs into different
/// directories produce identical manifests.
fn manifest_command(args: &SimulateArgs, with_weeks: bool) -> String {
    let mut cmd = format!("simulate {}", args.scenario);
    if with_weeks {
        let _ = write!(cmd, " --weeks {}", args.weeks);
    }
    if let Some(seed) = args.seed {
        let _ = write!(cmd, " --seed {seed}");
    }
    let _ = write!(cmd, " --timezone {}", args.timezone);
    cmd
}

fn simulate_weeks(args: &SimulateArgs) -> Result<(), CliError> {
    let (load_cfg, target_cfg) = load_configs(args.config.as_deref())?;
    parse_timezone(&args.timezone)?;
    let pattern = match args.scenario.as_str() {
        "constant" => WeekPattern::new(PatternKind::Constant, 400.0, 400.0, 0, args.weeks),
        "step_down" => WeekPattern::new(PatternKind::StepDown, 400.0, 100.0, 5, args.weeks),
        "step_up" => WeekPattern::new(PatternKind::StepUp, 250.0, 400.0, 9, args.weeks),
        "spike" => WeekPattern::new(PatternKind::Spike, 250.0, 450.0, 6, args.weeks),
        other => unreachable!("simulate() routes only known week scenarios, got {other}"),
    }
    .map_err(|e| CliError::Input(e.to_string()))?;

    let anchor = week_start_for(SIMULATION_EPOCH, target_cfg.week_start_day());
    let series = gen_week_series(&pattern, anchor);
    let (state, rows) = fold_weeks(&TargetState::initial(&target_cfg), &series, &target_cfg)
        .map_err(|e| CliError::History(e.to_string()))?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;
    let mut manifest = RunManifest::new(
        manifest_command(args, true),
        config_to_json(&load_cfg, &target_cfg),
    );
    write_file(&args.out, "weekly.csv", &weekly_to_csv(&series), &mut manifest, true)?;
    write_file(&args.out, "targets.csv", &target_rows_to_csv(&rows), &mut manifest, false)?;
    write_file(&args.out, "state.json", &state.to_json_string(), &mut manifest, false)?;
    write_file(&args.out, "plot_weeks.csv", &plot_weeks_to_csv(&rows), &mut manifest, false)?;
    write_output(&args.out.join("manifest.json"), &manifest.to_json_string())?;

    println!(
        "scenario {}: {} weeks from {}, final target {:.2} ({})",
        args.scenario,
        args.weeks,
        anchor,
        state.current_target(),
        state.phase()
    );
    println!("wrote weekly.csv, targets.csv, state.json, plot_weeks.csv, manifest.json to {}", args.out.display());
    Ok(())
}

fn simulate_day(args: &SimulateArgs) -> Result<(), CliError> {
    let (load_cfg, target_cfg) = load_configs(args.config.as_deref())?;
    let tz = parse_timezone(&args.timezone)?;
    let plan = match args.seed {
        None => showcase_day_plan(),
        Some(seed) => showcase_day_plan_with_seed(seed),
    };
    let profile = showcase_profile();
    let samples = gen_day(&plan, &profile, SHOWCASE_DATE);
    let sessions = sessions_for_plan(&plan, SHOWCASE_DATE);

    let details = score_minutes(&samples, &profile, &load_cfg);
    let details =
        attribute_minutes(details, &sessions).map_err(|e| CliError::Input(e.to_string()))?;
    let days =
        daily_summaries(&details, tz, &target_cfg).map_err(|e| CliError::Input(e.to_string()))?;
    let weeks = group_days_into_weeks(&days, &target_cfg)
        .map_err(|e| CliError::History(e.to_string()))?;
    let (state, rows) = fold_weeks(&TargetState::initial(&target_cfg), &weeks, &target_cfg)
        .map_err(|e| CliError::History(e.to_string()))?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;
    let mut manifest = RunManifest::new(
        manifest_command(args, false),
        config_to_json(&load_cfg, &target_cfg),
    );
    write_file(&args.out, "profile.json", &profile.to_json_string(), &mut manifest, true)?;
    write_file(&args.out, "minutes.csv", &minutes_to_csv(&samples), &mut manifest, true)?;
    write_file(&args.out, "workouts.csv", &workouts_csv(&sessions), &mut manifest, true)?;
    write_file(&args.out, "daily.csv", &daily_to_csv(&days), &mut manifest, false)?;
    write_file(&args.out, "weekly.csv", &weekly_to_csv(&weeks), &mut manifest, false)?;
    write_file(&args.out, "targets.csv", &target_rows_to_csv(&rows), &mut manifest, false)?;
    write_file(&args.out, "state.json", &state.to_json_string(), &mut manifest, false)?;
    write_file(&args.out, "plot_day.csv", &plot_day_to_csv(&details), &mut manifest, false)?;
    write_output(&args.out.join("manifest.json"), &manifest.to_json_string())?;

    print_days(&days);
    println!("wrote the generated day and its computed outputs to {}", args.out.display());
    Ok(())
}

/// Thin rename so the import list stays readable above.
fn workouts_csv(sessions: &[WorkoutSession]) -> String {
    cardioload::ingest::workouts_to_csv(sessions)
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

pub fn plot(kind: &PlotKind) -> Result<(), CliError> {
    match kind {
        PlotKind::MinuteCurve { config, out } => {
            let (load_cfg, _) = load_configs(config.as_deref())?;
            write_output(out, &minute_curve_csv(&load_cfg))?;
            println!("wrote {} points to {}", CURVE_STEPS + 1, out.display());
            Ok(())
        }
        PlotKind::Day { profile, minutes, workouts, config, out } => {
            let (load_cfg, _) = load_configs(config.as_deref())?;
            let profile = load_profile(profile)?;
            let sessions = load_sessions(workouts.as_deref())?;
            let minutes_csv = read_input(minutes)?;
            let (details, _) =
                score_and_attribute(&minutes_csv, &sessions, &profile, &load_cfg)?;
            write_output(out, &plot_day_to_csv(&details))?;
            println!("wrote {} minutes to {}", details.len(), out.display());
            Ok(())
        }
        PlotKind::Weeks { daily, weekly, state, config, out } => {
            let (_, target_cfg) = load_configs(config.as_deref())?;
            let prior = match state {
                Some(p) => load_state(p, &target_cfg)?,
                None => TargetState::initial(&target_cfg),
            };
            let weeks = load_weeks(daily.as_deref(), weekly.as_deref(), &target_cfg)?;
            let (_, rows): (TargetState, Vec<TargetRow>) = fold_weeks(&prior, &weeks, &target_cfg)
                .map_err(|e| CliError::History(e.to_string()))?;
            write_output(out, &plot_weeks_to_csv(&rows))?;
            println!("wrote {} weeks to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

/// Minute-level load versus %HRR at half-percent steps, for both sex
/// coefficients, with the floor and down-weight band applied.
fn minute_curve_csv(config: &LoadConfig) -> String {
    let mut out = String::from(MINUTE_CURVE_HEADER);
    out.push('\n');
    for i in 0..=CURVE_STEPS {
        let pct = i as f64 / CURVE_STEPS as f64;
        let _ = writeln!(
            out,
            "{},{},{}",
            pct,
            gated_load(pct, K_MALE, config),
            gated_load(pct, K_FEMALE, config)
        );
    }
    out
}
