//! Per-minute Cardio Load scoring and daily aggregation.
//!
//! Every worn minute with a heart-rate reading is scored with the modified
//! Banister training impulse
//!
//! ```text
//! load = scale * pct * e^(k * pct)        (pct = fraction of heart-rate reserve)
//! ```
//!
//! gated so that low-intensity or unreliable minutes cannot inflate the
//! total. Gates are resolved in a fixed order:
//!
//! 1. not worn                         -> `not_worn`, zero
//! 2. worn but no heart rate           -> `no_hr`, zero
//! 3. `pct < hrr_floor`                -> `below_floor`, zero
//! 4. heart rate elevated, no motion   -> `no_movement`, zero
//! 5. `pct < downweight_band_end`      -> `downweighted`, impulse x factor
//! 6. otherwise                        -> `full`, impulse
//!
//! `pct_hrr` is recorded whenever a heart rate is present, even when the
//! gate zeroes the minute, so downstream consumers can inspect intensity
//! independently of scoring.
//!
//! Scored minutes are then attributed to workout sessions (half-open
//! `[start, end)` intervals) and rolled up into per-day summaries on the
//! user's local calendar.

use chrono::NaiveDate;
use chrono::{DateTime, Utc};
use chrono_tz::Tz;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::domain::{LoadConfig, MinuteSample, TargetConfig, UserProfile, WorkoutSession};

/// Minutes in a civil day; the fixed denominator for wear coverage.
///
/// Days lengthened by a daylight-saving fold still divide by 1440, so a
/// fully worn 25-hour day simply saturates the coverage ratio.
pub const MINUTES_PER_DAY: u32 = 1440;

/// Why a minute scored the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Device not worn; nothing to score.
    NotWorn,
    /// Worn but the optical sensor produced no reading.
    NoHr,
    /// Intensity below the scoring floor.
    BelowFloor,
    /// Heart rate elevated with no motion (stress, caffeine, illness);
    /// zeroed because it does not reflect training stimulus.
    NoMovement,
    /// Inside the low-intensity band; impulse is down-weighted.
    Downweighted,
    /// Scored at full value.
    Full,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::NotWorn => "not_worn",
            Gate::NoHr => "no_hr",
            Gate::BelowFloor => "below_floor",
            Gate::NoMovement => "no_movement",
            Gate::Downweighted => "downweighted",
            Gate::Full => "full",
        })
    }
}

/// Scoring failure at the day level.
#[derive(Debug, Error, PartialEq)]
pub enum LoadError {
    #[error("sessions overlap: one ends {first_end}, next starts {second_start}")]
    OverlappingSessions {
        first_end: DateTime<Utc>,
        second_start: DateTime<Utc>,
    },
    #[error("cannot summarize an empty day")]
    EmptyDay,
    #[error("minutes span multiple local dates: expected {expected}, found {found}")]
    MixedDates { expected: NaiveDate, found: NaiveDate },
    #[error("invalid daily summary: {0}")]
    InvalidSummary(String),
}

/// One scored minute: intensity, gate decision, points awarded, and whether
/// the minute fell inside a workout session.
#[derive(Debug, Clone, PartialEq)]
pub struct MinuteLoadDetail {
    timestamp: DateTime<Utc>,
    pct_hrr: Option<f64>,
    gate: Gate,
    load_points: f64,
    in_workout: bool,
}

impl MinuteLoadDetail {
    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }

    /// Fraction of heart-rate reserve, present whenever the minute carried a
    /// heart rate (even if the gate zeroed the score).
    pub fn pct_hrr(&self) -> Option<f64> {
        self.pct_hrr
    }

    pub fn gate(&self) -> Gate {
        self.gate
    }

    pub fn load_points(&self) -> f64 {
        self.load_points
    }

    /// True once [`attribute_minutes`] has matched this minute to a session.
    pub fn in_workout(&self) -> bool {
        self.in_workout
    }
}

/// Fraction of heart-rate reserve at `hr_bpm`, clamped to `[0, 1]`.
pub fn percent_hrr(hr_bpm: f64, profile: &UserProfile) -> f64 {
    ((hr_bpm - profile.resting_hr()) / profile.hr_reserve()).clamp(0.0, 1.0)
}

/// The modified Banister training impulse for one minute at intensity
/// `pct_hrr`, with sex coefficient `k` and leading scale `scale`.
pub fn banister_load(pct_hrr: f64, k: f64, scale: f64) -> f64 {
    scale * pct_hrr * (k * pct_hrr).exp()
}

/// Load earned by a moving, heart-rate-bearing minute at intensity
/// `pct_hrr`: zero below the floor, down-weighted inside the dubious band,
/// the full Banister impulse above it. This is the curve a plot of load
/// versus intensity traces; [`minute_load`] adds the wear/HR/movement gates
/// on top.
pub fn gated_load(pct_hrr: f64, k: f64, config: &LoadConfig) -> f64 {
    if pct_hrr < config.hrr_floor() {
        return 0.0;
    }
    let impulse = banister_load(pct_hrr, k, config.banister_scale());
    if pct_hrr < config.downweight_band_end() {
        config.downweight_factor() * impulse
    } else {
        impulse
    }
}

/// Scores a single minute. Infallible: every well-formed sample maps to a
/// gate and a (possibly zero) number of points.
pub fn minute_load(
    sample: &MinuteSample,
    profile: &UserProfile,
    config: &LoadConfig,
) -> MinuteLoadDetail {
    let timestamp = sample.timestamp();
    let zero = |gate: Gate, pct_hrr: Option<f64>| MinuteLoadDetail {
        timestamp,
        pct_hrr,
        gate,
        load_points: 0.0,
        in_workout: false,
    };
    if !sample.worn() {
        return zero(Gate::NotWorn, None);
    }
    let Some(hr) = sample.hr_bpm() else {
        return zero(Gate::NoHr, None);
    };
    let pct = percent_hrr(hr, profile);
    if pct < config.hrr_floor() {
        return zero(Gate::BelowFloor, Some(pct));
    }
    if !sample.moving() {
        return zero(Gate::NoMovement, Some(pct));
    }
    let impulse = banister_load(pct, profile.sex_coefficient_k(), config.banister_scale());
    if pct < config.downweight_band_end() {
        MinuteLoadDetail {
            timestamp,
            pct_hrr: Some(pct),
            gate: Gate::Downweighted,
            load_points: config.downweight_factor() * impulse,
            in_workout: false,
        }
    } else {
        MinuteLoadDetail {
            timestamp,
            pct_hrr: Some(pct),
            gate: Gate::Full,
            load_points: impulse,
            in_workout: false,
        }
    }
}

/// Scores a batch of minutes. Order is preserved.
pub fn score_minutes(
    samples: &[MinuteSample],
    profile: &UserProfile,
    config: &LoadConfig,
) -> Vec<MinuteLoadDetail> {
    samples.iter().map(|s| minute_load(s, profile, config)).collect()
}

/// Marks each minute that falls inside a workout session.
///
/// Sessions may touch (one ending exactly where the next starts) but may not
/// overlap. Intervals are half-open, so the minute starting exactly at a
/// session's `end` belongs to the next session or to incidental time.
pub fn attribute_minutes(
    mut details: Vec<MinuteLoadDetail>,
    sessions: &[WorkoutSession],
) -> Result<Vec<MinuteLoadDetail>, LoadError> {
    let mut sorted: Vec<&WorkoutSession> = sessions.iter().collect();
    sorted.sort_by_key(|s| s.start());
    for pair in sorted.windows(2) {
        if pair[1].start() < pair[0].end() {
            return Err(LoadError::OverlappingSessions {
                first_end: pair[0].end(),
                second_start: pair[1].start(),
            });
        }
    }
    for detail in &mut details {
        // Last session starting at or before this minute is the only
        // candidate that can contain it.
        let idx = sorted.partition_point(|s| s.start() <= detail.timestamp);
        detail.in_workout = idx > 0 && sorted[idx - 1].contains(detail.timestamp);
    }
    Ok(details)
}

/// One local calendar day of aggregated load.
///
/// `total_load` is exactly `workout_load + incidental_load`; the partition
/// is exhaustive, so the identity holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySummary {
    date: NaiveDate,
    total_load: f64,
    workout_load: f64,
    incidental_load: f64,
    worn_minutes: u32,
    observed: bool,
}

impl DailySummary {
    /// Builds a summary, enforcing non-negative finite loads, the exact
    /// partition identity, and a plausible worn-minute count (a
    /// daylight-saving fold can stretch a local day to 25 hours).
    pub fn new(
        date: NaiveDate,
        total_load: f64,
        workout_load: f64,
        incidental_load: f64,
        worn_minutes: u32,
        observed: bool,
    ) -> Result<Self, LoadError> {
        let bad = |msg: String| LoadError::InvalidSummary(msg);
        for (name, v) in [
            ("total_load", total_load),
            ("workout_load", workout_load),
            ("incidental_load", incidental_load),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(bad(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if workout_load + incidental_load != total_load {
            return Err(bad(format!(
                "workout_load + incidental_load must equal total_load exactly \
                 ({workout_load} + {incidental_load} != {total_load})"
            )));
        }
        if worn_minutes > 25 * 60 {
            return Err(bad(format!("worn_minutes out of range: {worn_minutes}")));
        }
        Ok(Self { date, total_load, workout_load, incidental_load, worn_minutes, observed })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn total_load(&self) -> f64 {
        self.total_load
    }

    pub fn workout_load(&self) -> f64 {
        self.workout_load
    }

    pub fn incidental_load(&self) -> f64 {
        self.incidental_load
    }

    pub fn worn_minutes(&self) -> u32 {
        self.worn_minutes
    }

    /// Whether wear coverage met the day-coverage threshold.
    pub fn observed(&self) -> bool {
        self.observed
    }
}

/// Rolls one local calendar day of scored minutes into a [`DailySummary`].
///
/// The day's date is taken from the first minute, converted to `tz`; every
/// other minute must fall on the same local date. A day with nothing but
/// zero-scoring minutes still produces a (zero) summary — rest days are
/// data, not gaps.
pub fn daily_summary(
    details: &[MinuteLoadDetail],
    tz: Tz,
    config: &TargetConfig,
) -> Result<DailySummary, LoadError> {
    let first = details.first().ok_or(LoadError::EmptyDay)?;
    let date = local_date(first.timestamp, tz);
    let mut workout = 0.0;
    let mut incidental = 0.0;
    let mut worn = 0u32;
    for d in details {
        let found = local_date(d.timestamp, tz);
        if found != date {
            return Err(LoadError::MixedDates { expected: date, found });
        }
        if d.in_workout {
            workout += d.load_points;
        } else {
            incidental += d.load_points;
        }
        if d.gate != Gate::NotWorn {
            worn += 1;
        }
    }
    let observed = f64::from(worn) / f64::from(MINUTES_PER_DAY) >= config.day_coverage_threshold();
    DailySummary::new(date, workout + incidental, workout, incidental, worn, observed)
}

/// Groups scored minutes by local calendar date and summarizes each day,
/// in date order.
pub fn daily_summaries(
    details: &[MinuteLoadDetail],
    tz: Tz,
    config: &TargetConfig,
) -> Result<Vec<DailySummary>, LoadError> {
    let mut days: BTreeMap<NaiveDate, Vec<MinuteLoadDetail>> = BTreeMap::new();
    for d in details {
        days.entry(local_date(d.timestamp, tz)).or_default().push(d.clone());
    }
    days.values().map(|day| daily_summary(day, tz, config)).collect()
}

/// The local civil date on which a UTC instant falls.
pub fn local_date(t: DateTime<Utc>, tz: Tz) -> NaiveDate {
    t.with_timezone(&tz).date_naive()
}
