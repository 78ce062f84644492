//! File formats: CSV readers/writers and error reporting.
//!
//! All formats are plain UTF-8 CSV with a mandatory header and no quoting
//! (the free-text workout label is always the last field, so embedded
//! commas survive). Parsing is hand-rolled so every diagnostic carries the
//! exact 1-based physical line number, which generic CSV readers tend to
//! fudge around headers.
//!
//! The minute stream is parsed *softly*: a malformed row is recorded and
//! skipped, and parsing continues — one glitchy sensor row must not discard
//! a day. Structural problems (wrong header, timestamps out of order) are
//! hard errors because nothing downstream is trustworthy after them.
//! Interior gaps in the minute timeline are synthesized as not-worn minutes
//! and reported, so downstream code always sees a contiguous stream.
//!
//! Floats are written with Rust's shortest round-trip formatting: parsing a
//! written file reproduces the original values bit for bit.

use chrono::{DateTime, SecondsFormat, Utc};
use std::fmt::Write as _;
use thiserror::Error;

use crate::domain::{MinuteSample, SessionSource, WorkoutSession};
use crate::load::{DailySummary, MinuteLoadDetail};
use crate::target::{TargetRow, WeeklyLoad};

pub const MINUTES_HEADER: &str = "timestamp,hr_bpm,moving,worn";
pub const WORKOUTS_HEADER: &str = "start,end,source,label";
pub const WEEKLY_HEADER: &str = "week_start,total_load,observed_days";
pub const DAILY_HEADER: &str =
    "date,total_load,workout_load,incidental_load,worn_minutes,observed";
pub const TARGET_ROWS_HEADER: &str = "week_start,weekly_load,rm,ewma,target,phase,status";
pub const PLOT_DAY_HEADER: &str = "timestamp,pct_hrr,load,in_workout";
pub const PLOT_WEEKS_HEADER: &str = "week_start,weekly_cl,rm,ewma,target";

/// Unrecoverable parse failure: the file as a whole cannot be trusted.
#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("bad header: expected \"{expected}\", found \"{found}\"")]
    BadHeader { expected: &'static str, found: String },
    #[error("line {line}: timestamps out of order ({prev} then {next})")]
    OutOfOrder { line: u64, prev: DateTime<Utc>, next: DateTime<Utc> },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
}

/// One rejected minute row: where and why.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    line: u64,
    message: String,
}

impl RowError {
    /// 1-based physical line number in the input (the header is line 1).
    pub fn line(&self) -> u64 {
        self.line
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

/// A half-open span `[start, end)` of minutes missing from the input and
/// synthesized as not worn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSpan {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl GapSpan {
    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn minutes(&self) -> i64 {
        (self.end - self.start).num_minutes()
    }
}

/// What happened while parsing a minute stream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestReport {
    records_accepted: usize,
    records_rejected: usize,
    errors: Vec<RowError>,
    gaps: Vec<GapSpan>,
}

impl IngestReport {
    pub fn records_accepted(&self) -> usize {
        self.records_accepted
    }

    pub fn records_rejected(&self) -> usize {
        self.records_rejected
    }

    /// One entry per rejected row, in input order.
    pub fn errors(&self) -> &[RowError] {
        &self.errors
    }

    /// Interior timeline gaps filled with synthesized not-worn minutes.
    pub fn gaps(&self) -> &[GapSpan] {
        &self.gaps
    }

    pub fn minutes_synthesized(&self) -> i64 {
        self.gaps.iter().map(GapSpan::minutes).sum()
    }
}

fn check_header(input: &str, expected: &'static str) -> Result<(), IngestError> {
    let first = input.lines().next().unwrap_or("");
    // Tolerate a UTF-8 byte-order mark from spreadsheet exports.
    if first.trim_start_matches('\u{feff}') != expected {
        return Err(IngestError::BadHeader { expected, found: first.to_string() });
    }
    Ok(())
}

/// Data lines with their 1-based physical line numbers; blank lines are
/// skipped, the header (line 1) is consumed by `check_header`.
fn data_lines(input: &str) -> impl Iterator<Item = (u64, &str)> {
    input
        .lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i as u64 + 1, l))
}

fn parse_utc(field: &str) -> Result<DateTime<Utc>, String> {
    let dt = DateTime::parse_from_rfc3339(field)
        .map_err(|e| format!("bad timestamp \"{field}\": {e}"))?;
    if dt.offset().local_minus_utc() != 0 {
        return Err(format!("timestamp \"{field}\" must be UTC"));
    }
    Ok(dt.with_timezone(&Utc))
}

fn parse_flag(field: &str, name: &str) -> Result<bool, String> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("{name} must be 0 or 1, got \"{other}\"")),
    }
}

fn rfc3339(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

// ---------------------------------------------------------------------------
// Minute stream
// ---------------------------------------------------------------------------

fn parse_minute_row(raw: &str) -> Result<MinuteSample, String> {
    let fields: Vec<&str> = raw.split(',').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    }
    let timestamp = parse_utc(fields[0])?;
    let hr_bpm = if fields[1].is_empty() {
        None
    } else {
        Some(
            fields[1]
                .parse::<f64>()
                .map_err(|_| format!("bad hr_bpm \"{}\"", fields[1]))?,
        )
    };
    let moving = parse_flag(fields[2], "moving")?;
    let worn = parse_flag(fields[3], "worn")?;
    MinuteSample::new(timestamp, hr_bpm, moving, worn).map_err(|e| e.to_string())
}

/// Parses a minute stream.
///
/// Malformed rows are rejected individually (with their line numbers) and
/// parsing continues. Missing interior minutes are synthesized as not worn
/// so the returned stream is contiguous. A wrong header or out-of-order
/// timestamps abort the parse.
pub fn parse_minutes(input: &str) -> Result<(Vec<MinuteSample>, IngestReport), IngestError> {
    check_header(input, MINUTES_HEADER)?;
    let mut samples: Vec<MinuteSample> = Vec::new();
    let mut report = IngestReport::default();
    for (line, raw) in data_lines(input) {
        match parse_minute_row(raw) {
            Err(message) => {
                report.records_rejected += 1;
                report.errors.push(RowError { line, message });
            }
            Ok(sample) => {
                if let Some(prev) = samples.last() {
                    if sample.timestamp() <= prev.timestamp() {
                        return Err(IngestError::OutOfOrder {
                            line,
                            prev: prev.timestamp(),
                            next: sample.timestamp(),
                        });
                    }
                    let gap_start = prev.timestamp() + chrono::Duration::minutes(1);
                    if sample.timestamp() > gap_start {
                        report.gaps.push(GapSpan { start: gap_start, end: sample.timestamp() });
                        let mut cursor = gap_start;
                        while cursor < sample.timestamp() {
                            samples.push(
                                MinuteSample::not_worn(cursor)
                                    .expect("synthesized minutes are aligned"),
                            );
                            cursor += chrono::Duration::minutes(1);
                        }
                    }
                }
                report.records_accepted += 1;
                samples.push(sample);
            }
        }
    }
    Ok((samples, report))
}

/// Writes a minute stream in the canonical format. Optional heart rate is
/// left empty; flags are `0`/`1`.
pub fn minutes_to_csv(samples: &[MinuteSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 32 + 32);
    out.push_str(MINUTES_HEADER);
    out.push('\n');
    for s in samples {
        let hr = s.hr_bpm().map(|h| h.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            rfc3339(s.timestamp()),
            hr,
            u8::from(s.moving()),
            u8::from(s.worn())
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Workout sessions
// ---------------------------------------------------------------------------

/// Parses workout sessions. Any malformed row is a hard error: sessions
/// drive attribution, and a silently dropped session would misfile load.
///
/// The label is everything after the third comma and may itself contain
/// commas; an empty label parses as none.
pub fn parse_workouts(input: &str) -> Result<Vec<WorkoutSession>, IngestError> {
    check_header(input, WORKOUTS_HEADER)?;
    let mut sessions = Vec::new();
    for (line, raw) in data_lines(input) {
        let hard = |message: String| IngestError::Malformed { line, message };
        let fields: Vec<&str> = raw.splitn(4, ',').collect();
        if fields.len() != 4 {
            return Err(hard(format!("expected 4 fields, found {}", fields.len())));
        }
        let start = parse_utc(fields[0]).map_err(hard)?;
        let end = parse_utc(fields[1]).map_err(hard)?;
        let source: SessionSource = fields[2].parse().map_err(|e: crate::domain::DomainError| {
            hard(e.to_string())
        })?;
        let label = if fields[3].is_empty() { None } else { Some(fields[3].to_string()) };
        sessions
            .push(WorkoutSession::new(start, end, source, label).map_err(|e| hard(e.to_string()))?);
    }
    Ok(sessions)
}

pub fn workouts_to_csv(sessions: &[WorkoutSession]) -> String {
    let mut out = String::from(WORKOUTS_HEADER);
    out.push('\n');
    for s in sessions {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            rfc3339(s.start()),
            rfc3339(s.end()),
            s.source(),
            s.label().unwrap_or("")
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Weekly loads
// ---------------------------------------------------------------------------

/// Parses a weekly-load history. Malformed rows are hard errors.
pub fn parse_weekly(input: &str) -> Result<Vec<WeeklyLoad>, IngestError> {
    check_header(input, WEEKLY_HEADER)?;
    let mut weeks = Vec::new();
    for (line, raw) in data_lines(input) {
        let hard = |message: String| IngestError::Malformed { line, message };
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(hard(format!("expected 3 fields, found {}", fields.len())));
        }
        let week_start = fields[0]
            .parse()
            .map_err(|_| hard(format!("bad week_start \"{}\"", fields[0])))?;
        let total_load = fields[1]
            .parse::<f64>()
            .map_err(|_| hard(format!("bad total_load \"{}\"", fields[1])))?;
        let observed_days = fields[2]
            .parse::<u32>()
            .map_err(|_| hard(format!("bad observed_days \"{}\"", fields[2])))?;
        weeks.push(
            WeeklyLoad::new(week_start, total_load, observed_days)
                .map_err(|e| hard(e.to_string()))?,
        );
    }
    Ok(weeks)
}

pub fn weekly_to_csv(weeks: &[WeeklyLoad]) -> String {
    let mut out = String::from(WEEKLY_HEADER);
    out.push('\n');
    for w in weeks {
        let _ = writeln!(out, "{},{},{}", w.week_start(), w.total_load(), w.observed_days());
    }
    out
}

// ---------------------------------------------------------------------------
// Daily summaries
// ---------------------------------------------------------------------------

/// Parses daily summaries. Malformed rows are hard errors, including rows
/// whose loads break the `workout + incidental == total` identity.
pub fn parse_daily(input: &str) -> Result<Vec<DailySummary>, IngestError> {
    check_header(input, DAILY_HEADER)?;
    let mut days = Vec::new();
    for (line, raw) in data_lines(input) {
        let hard = |message: String| IngestError::Malformed { line, message };
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(hard(format!("expected 6 fields, found {}", fields.len())));
        }
        let date = fields[0].parse().map_err(|_| hard(format!("bad date \"{}\"", fields[0])))?;
        let float = |i: usize, name: &str| -> Result<f64, IngestError> {
            fields[i].parse::<f64>().map_err(|_| IngestError::Malformed {
                line,
                message: format!("bad {name} \"{}\"", fields[i]),
            })
        };
        let total_load = float(1, "total_load")?;
        let workout_load = float(2, "workout_load")?;
        let incidental_load = float(3, "incidental_load")?;
        let worn_minutes = fields[4]
            .parse::<u32>()
            .map_err(|_| hard(format!("bad worn_minutes \"{}\"", fields[4])))?;
        let observed = parse_flag(fields[5], "observed").map_err(hard)?;
        days.push(
            DailySummary::new(date, total_load, workout_load, incidental_load, worn_minutes, observed)
                .map_err(|e| hard(e.to_string()))?,
        );
    }
    Ok(days)
}

pub fn daily_to_csv(days: &[DailySummary]) -> String {
    let mut out = String::from(DAILY_HEADER);
    out.push('\n');
    for day in days {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            day.date(),
            day.total_load(),
            day.workout_load(),
            day.incidental_load(),
            day.worn_minutes(),
            u8::from(day.observed())
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Write-only report formats
// ---------------------------------------------------------------------------

/// Writes the week-by-week target trace produced by folding a history.
///
/// `status` classifies the week's accrued load against the target that was
/// in force while the week was being lived, not the freshly recomputed one.
pub fn target_rows_to_csv(rows: &[TargetRow]) -> String {
    let mut out = String::from(TARGET_ROWS_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.week_start,
            row.total_load,
            row.rolling_mean,
            row.ewma,
            row.target,
            row.phase,
            row.status.status()
        );
    }
    out
}

/// Writes scored minutes as plot data. `pct_hrr` is empty when the minute
/// carried no heart rate; zero-load minutes keep their intensity visible.
pub fn plot_day_to_csv(details: &[MinuteLoadDetail]) -> String {
    let mut out = String::from(PLOT_DAY_HEADER);
    out.push('\n');
    for detail in details {
        let pct = detail.pct_hrr().map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            rfc3339(detail.timestamp()),
            pct,
            detail.load_points(),
            u8::from(detail.in_workout())
        );
    }
    out
}

/// Writes the weekly series with its derived statistics as plot data.
pub fn plot_weeks_to_csv(rows: &[TargetRow]) -> String {
    let mut out = String::from(PLOT_WEEKS_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.week_start, row.total_load, row.rolling_mean, row.ewma, row.target
        );
    }
    out
}
