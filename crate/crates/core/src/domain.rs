//! Validated vocabulary types shared by every stage of the pipeline.
//!
//! Each type is constructed through a validating constructor and exposes
//! read-only accessors. Once a value exists it is internally consistent, so
//! downstream code never re-checks invariants.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Timelike, Utc, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Banister sex coefficient for male users.
pub const K_MALE: f64 = 1.92;
/// Banister sex coefficient for female users.
pub const K_FEMALE: f64 = 1.67;

/// Longest allowed workout session.
const MAX_SESSION_MINUTES: i64 = 24 * 60;

/// Validation failure for a domain value or configuration.
#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid minute sample: {0}")]
    InvalidSample(String),
    #[error("invalid workout session: {0}")]
    InvalidSession(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

fn ensure(cond: bool, err: impl FnOnce() -> DomainError) -> Result<(), DomainError> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}

// ---------------------------------------------------------------------------
// User profile
// ---------------------------------------------------------------------------

/// A user's physiological parameters for heart-rate-reserve scoring.
///
/// `sex_coefficient_k` is the exponent coefficient of the Banister impulse
/// curve: [`K_MALE`] or [`K_FEMALE`] for the named sexes, or any value in
/// `(0, 4]` supplied explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    user_id: String,
    sex_coefficient_k: f64,
    resting_hr: f64,
    max_hr: f64,
}

impl UserProfile {
    /// Builds a profile, rejecting physiologically implausible values.
    ///
    /// Requires a non-empty `user_id`, `k` in `(0, 4]`, and
    /// `20 <= resting_hr < max_hr <= 250`.
    pub fn new(
        user_id: impl Into<String>,
        sex_coefficient_k: f64,
        resting_hr: f64,
        max_hr: f64,
    ) -> Result<Self, DomainError> {
        let user_id = user_id.into();
        let bad = |msg: String| DomainError::InvalidProfile(msg);
        ensure(!user_id.is_empty(), || bad("user_id must be non-empty".into()))?;
        ensure(
            sex_coefficient_k.is_finite() && sex_coefficient_k > 0.0 && sex_coefficient_k <= 4.0,
            || bad(format!("sex coefficient k must be in (0, 4], got {sex_coefficient_k}")),
        )?;
        ensure(resting_hr.is_finite() && max_hr.is_finite(), || {
            bad("heart rates must be finite".into())
        })?;
        ensure(
            (20.0..250.0).contains(&resting_hr) && resting_hr < max_hr && max_hr <= 250.0,
            || bad(format!("need 20 <= resting_hr < max_hr <= 250, got {resting_hr}/{max_hr}")),
        )?;
        Ok(Self { user_id, sex_coefficient_k, resting_hr, max_hr })
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn sex_coefficient_k(&self) -> f64 {
        self.sex_coefficient_k
    }

    pub fn resting_hr(&self) -> f64 {
        self.resting_hr
    }

    pub fn max_hr(&self) -> f64 {
        self.max_hr
    }

    /// Heart-rate reserve, `max_hr - resting_hr`. Always positive.
    pub fn hr_reserve(&self) -> f64 {
        self.max_hr - self.resting_hr
    }

    /// Parses the profile JSON document.
    ///
    /// The `sex` field is either the string `"male"` / `"female"` (mapped to
    /// the standard coefficients) or an object `{"k": <value>}` for an
    /// explicit coefficient.
    pub fn from_json_str(s: &str) -> Result<Self, DomainError> {
        let raw: ProfileFile =
            serde_json::from_str(s).map_err(|e| DomainError::InvalidProfile(e.to_string()))?;
        let k = match raw.sex {
            SexField::Named(name) => match name.as_str() {
                "male" => K_MALE,
                "female" => K_FEMALE,
                other => {
                    return Err(DomainError::InvalidProfile(format!(
                        "sex must be \"male\", \"female\", or {{\"k\": ...}}, got \"{other}\""
                    )))
                }
            },
            SexField::Coefficient { k } => k,
        };
        Self::new(raw.user_id, k, raw.resting_hr, raw.max_hr)
    }

    /// Serializes the profile as JSON.
    ///
    /// The coefficient is always written in the explicit `{"k": ...}` form so
    /// the output round-trips exactly even for custom coefficients.
    pub fn to_json_string(&self) -> String {
        let raw = ProfileFile {
            user_id: self.user_id.clone(),
            sex: SexField::Coefficient { k: self.sex_coefficient_k },
            resting_hr: self.resting_hr,
            max_hr: self.max_hr,
        };
        serde_json::to_string_pretty(&raw).expect("profile serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    user_id: String,
    sex: SexField,
    resting_hr: f64,
    max_hr: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SexField {
    Named(String),
    Coefficient { k: f64 },
}

// ---------------------------------------------------------------------------
// Minute samples
// ---------------------------------------------------------------------------

/// One minute of wearable data.
///
/// Timestamps are UTC and aligned to the start of the minute. A sample that
/// was not worn carries no heart rate and no motion.
#[derive(Debug, Clone, PartialEq)]
pub struct MinuteSample {
    timestamp: DateTime<Utc>,
    hr_bpm: Option<f64>,
    moving: bool,
    worn: bool,
}

impl MinuteSample {
    /// Builds a sample, enforcing minute alignment, plausible heart rate
    /// (`20..=250` bpm when present), and `worn = false` implying no heart
    /// rate and no motion.
    pub fn new(
        timestamp: DateTime<Utc>,
        hr_bpm: Option<f64>,
        moving: bool,
        worn: bool,
    ) -> Result<Self, DomainError> {
        let bad = |msg: String| DomainError::InvalidSample(msg);
        ensure(timestamp.second() == 0 && timestamp.nanosecond() == 0, || {
            bad(format!("timestamp must be minute-aligned, got {timestamp}"))
        })?;
        if let Some(hr) = hr_bpm {
            ensure(hr.is_finite() && (20.0..=250.0).contains(&hr), || {
                bad(format!("hr_bpm must be in [20, 250], got {hr}"))
            })?;
        }
        if !worn {
            ensure(hr_bpm.is_none() && !moving, || {
                bad("a not-worn minute cannot carry heart rate or motion".into())
            })?;
        }
        Ok(Self { timestamp, hr_bpm, moving, worn })
    }

    /// Convenience constructor for a synthesized not-worn minute.
    pub fn not_worn(timestamp: DateTime<Utc>) -> Result<Self, DomainError> {
        Self::new(timestamp, None, false, false)
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }

    pub fn hr_bpm(&self) -> Option<f64> {
        self.hr_bpm
    }

    pub fn moving(&self) -> bool {
        self.moving
    }

    pub fn worn(&self) -> bool {
        self.worn
    }
}

// ---------------------------------------------------------------------------
// Workout sessions
// ---------------------------------------------------------------------------

/// Where a workout session record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionSource {
    /// Logged by the user.
    Manual,
    /// Detected automatically by the device.
    Auto,
}

impl fmt::Display for SessionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionSource::Manual => "manual",
            SessionSource::Auto => "auto",
        })
    }
}

impl FromStr for SessionSource {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "manual" => Ok(SessionSource::Manual),
            "auto" => Ok(SessionSource::Auto),
            other => Err(DomainError::InvalidSession(format!(
                "source must be \"manual\" or \"auto\", got \"{other}\""
            ))),
        }
    }
}

/// A workout session, with a half-open minute interval `[start, end)`.
///
/// Minutes whose timestamp satisfies `start <= t < end` belong to the
/// session; the minute beginning exactly at `end` does not.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkoutSession {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    source: SessionSource,
    label: Option<String>,
}

impl WorkoutSession {
    /// Builds a session. Both endpoints must be minute-aligned, `end` must be
    /// strictly after `start`, and the duration must not exceed 24 hours.
    pub fn new(
        start: DateTime<Utc>,
        end: DateTime<Utc>,
        source: SessionSource,
        label: Option<String>,
    ) -> Result<Self, DomainError> {
        let bad = |msg: String| DomainError::InvalidSession(msg);
        ensure(start.second() == 0 && start.nanosecond() == 0, || {
            bad(format!("start must be minute-aligned, got {start}"))
        })?;
        ensure(end.second() == 0 && end.nanosecond() == 0, || {
            bad(format!("end must be minute-aligned, got {end}"))
        })?;
        ensure(end > start, || bad(format!("end must be after start, got {start}..{end}")))?;
        ensure((end - start).num_minutes() <= MAX_SESSION_MINUTES, || {
            bad("session longer than 24 hours".into())
        })?;
        Ok(Self { start, end, source, label })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn source(&self) -> SessionSource {
        self.source
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn duration_minutes(&self) -> i64 {
        (self.end - self.start).num_minutes()
    }

    /// Whether the minute starting at `t` falls inside the session
    /// (half-open: the minute starting exactly at `end` is outside).
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Tunables for the per-minute load engine.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadConfig {
    hrr_floor: f64,
    downweight_band_end: f64,
    downweight_factor: f64,
    banister_scale: f64,
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            hrr_floor: 0.30,
            downweight_band_end: 0.40,
            downweight_factor: 0.5,
            banister_scale: 0.64,
        }
    }
}

impl LoadConfig {
    /// Builds a config, requiring `0 <= hrr_floor < downweight_band_end <= 1`,
    /// `downweight_factor` in `(0, 1]`, and `banister_scale` in `(0, 10]`.
    pub fn new(
        hrr_floor: f64,
        downweight_band_end: f64,
        downweight_factor: f64,
        banister_scale: f64,
    ) -> Result<Self, DomainError> {
        let bad = |msg: String| DomainError::InvalidConfig(msg);
        for (name, v) in [
            ("hrr_floor", hrr_floor),
            ("downweight_band_end", downweight_band_end),
            ("downweight_factor", downweight_factor),
            ("banister_scale", banister_scale),
        ] {
            ensure(v.is_finite(), || bad(format!("{name} must be finite, got {v}")))?;
        }
        ensure(0.0 <= hrr_floor && hrr_floor < downweight_band_end && downweight_band_end <= 1.0, || {
            bad(format!(
                "need 0 <= hrr_floor < downweight_band_end <= 1, got {hrr_floor}/{downweight_band_end}"
            ))
        })?;
        ensure(downweight_factor > 0.0 && downweight_factor <= 1.0, || {
            bad(format!("downweight_factor must be in (0, 1], got {downweight_factor}"))
        })?;
        ensure(banister_scale > 0.0 && banister_scale <= 10.0, || {
            bad(format!("banister_scale must be in (0, 10], got {banister_scale}"))
        })?;
        Ok(Self { hrr_floor, downweight_band_end, downweight_factor, banister_scale })
    }

    /// %HRR below which a minute scores zero. Default `0.30`.
    pub fn hrr_floor(&self) -> f64 {
        self.hrr_floor
    }

    /// Upper end (exclusive) of the down-weighted band. Default `0.40`.
    pub fn downweight_band_end(&self) -> f64 {
        self.downweight_band_end
    }

    /// Multiplier applied inside the down-weighted band. Default `0.5`.
    pub fn downweight_factor(&self) -> f64 {
        self.downweight_factor
    }

    /// Leading scale of the Banister impulse curve. Default `0.64`.
    pub fn banister_scale(&self) -> f64 {
        self.banister_scale
    }
}

/// Tunables for weekly aggregation and the adaptive target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetConfig {
    ewma_alpha: f64,
    rm_window_weeks: usize,
    min_target: f64,
    overreach_ratio: f64,
    week_start_day: Weekday,
    day_coverage_threshold: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            ewma_alpha: 0.4,
            rm_window_weeks: 4,
            min_target: 50.0,
            overreach_ratio: 1.5,
            week_start_day: Weekday::Mon,
            day_coverage_threshold: 0.5,
        }
    }
}

impl TargetConfig {
    /// Builds a config, requiring `ewma_alpha` in `(0, 1)`,
    /// `rm_window_weeks >= 1`, `min_target >= 0`, `overreach_ratio > 1`, and
    /// `day_coverage_threshold` in `(0, 1]`.
    pub fn new(
        ewma_alpha: f64,
        rm_window_weeks: usize,
        min_target: f64,
        overreach_ratio: f64,
        week_start_day: Weekday,
        day_coverage_threshold: f64,
    ) -> Result<Self, DomainError> {
        let bad = |msg: String| DomainError::InvalidConfig(msg);
        ensure(ewma_alpha.is_finite() && ewma_alpha > 0.0 && ewma_alpha < 1.0, || {
            bad(format!("ewma_alpha must be in (0, 1), got {ewma_alpha}"))
        })?;
        ensure(rm_window_weeks >= 1, || bad("rm_window_weeks must be at least 1".into()))?;
        ensure(min_target.is_finite() && min_target >= 0.0, || {
            bad(format!("min_target must be non-negative, got {min_target}"))
        })?;
        ensure(overreach_ratio.is_finite() && overreach_ratio > 1.0, || {
            bad(format!("overreach_ratio must be greater than 1, got {overreach_ratio}"))
        })?;
        ensure(
            day_coverage_threshold.is_finite()
                && day_coverage_threshold > 0.0
                && day_coverage_threshold <= 1.0,
            || bad(format!("day_coverage_threshold must be in (0, 1], got {day_coverage_threshold}")),
        )?;
        Ok(Self {
            ewma_alpha,
            rm_window_weeks,
            min_target,
            overreach_ratio,
            week_start_day,
            day_coverage_threshold,
        })
    }

    /// EWMA smoothing factor. Default `0.4`.
    pub fn ewma_alpha(&self) -> f64 {
        self.ewma_alpha
    }

    /// Rolling-mean window length in weeks. Default `4`.
    pub fn rm_window_weeks(&self) -> usize {
        self.rm_window_weeks
    }

    /// Floor below which the weekly target never drops. Default `50`.
    pub fn min_target(&self) -> f64 {
        self.min_target
    }

    /// Accrued/target ratio above which a week is over-reached. Default `1.5`.
    pub fn overreach_ratio(&self) -> f64 {
        self.overreach_ratio
    }

    /// First day of the calendar week. Default Monday.
    pub fn week_start_day(&self) -> Weekday {
        self.week_start_day
    }

    /// Fraction of a day's minutes that must be worn for the day to count as
    /// observed. Default `0.5`.
    pub fn day_coverage_threshold(&self) -> f64 {
        self.day_coverage_threshold
    }
}

/// Raw config file: one flat JSON object covering both engines.
///
/// Every field is optional; absent fields take the documented defaults.
/// Unknown fields are rejected so typos fail loudly.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    hrr_floor: Option<f64>,
    downweight_band_end: Option<f64>,
    downweight_factor: Option<f64>,
    banister_scale: Option<f64>,
    ewma_alpha: Option<f64>,
    rm_window_weeks: Option<usize>,
    min_target: Option<f64>,
    overreach_ratio: Option<f64>,
    week_start_day: Option<String>,
    day_coverage_threshold: Option<f64>,
}

/// Parses the flat JSON config document into the two engine configs.
///
/// An empty object (or any subset of fields) is valid; the result is
/// re-validated as a whole so partial overrides cannot produce an
/// inconsistent configuration.
pub fn parse_config_json(s: &str) -> Result<(LoadConfig, TargetConfig), DomainError> {
    let raw: ConfigFile =
        serde_json::from_str(s).map_err(|e| DomainError::InvalidConfig(e.to_string()))?;
    let ld = LoadConfig::default();
    let td = TargetConfig::default();
    let week_start_day = match raw.week_start_day {
        None => td.week_start_day(),
        Some(name) => name.parse::<Weekday>().map_err(|_| {
            DomainError::InvalidConfig(format!("week_start_day is not a weekday: \"{name}\""))
        })?,
    };
    let load = LoadConfig::new(
        raw.hrr_floor.unwrap_or(ld.hrr_floor()),
        raw.downweight_band_end.unwrap_or(ld.downweight_band_end()),
        raw.downweight_factor.unwrap_or(ld.downweight_factor()),
        raw.banister_scale.unwrap_or(ld.banister_scale()),
    )?;
    let target = TargetConfig::new(
        raw.ewma_alpha.unwrap_or(td.ewma_alpha()),
        raw.rm_window_weeks.unwrap_or(td.rm_window_weeks()),
        raw.min_target.unwrap_or(td.min_target()),
        raw.overreach_ratio.unwrap_or(td.overreach_ratio()),
        week_start_day,
        raw.day_coverage_threshold.unwrap_or(td.day_coverage_threshold()),
    )?;
    Ok((load, target))
}

/// Serializes the effective configuration as a canonical JSON document with
/// every field present. Used to echo configuration into run manifests.
pub fn config_to_json(load: &LoadConfig, target: &TargetConfig) -> String {
    let value = serde_json::json!({
        "hrr_floor": load.hrr_floor(),
        "downweight_band_end": load.downweight_band_end(),
        "downweight_factor": load.downweight_factor(),
        "banister_scale": load.banister_scale(),
        "ewma_alpha": target.ewma_alpha(),
        "rm_window_weeks": target.rm_window_weeks(),
        "min_target": target.min_target(),
        "overreach_ratio": target.overreach_ratio(),
        "week_start_day": weekday_name(target.week_start_day()),
        "day_coverage_threshold": target.day_coverage_threshold(),
    });
    serde_json::to_string_pretty(&value).expect("config serialization cannot fail")
}

/// Full lowercase weekday name, as written in config files.
pub fn weekday_name(day: Weekday) -> &'static str {
    match day {
        Weekday::Mon => "monday",
        Weekday::Tue => "tuesday",
        Weekday::Wed => "wednesday",
        Weekday::Thu => "thursday",
        Weekday::Fri => "friday",
        Weekday::Sat => "saturday",
        Weekday::Sun => "sunday",
    }
}
