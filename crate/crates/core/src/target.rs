//! Weekly aggregation and the adaptive weekly target.
//!
//! The weekly Cardio Load target combines two views of recent history and a
//! safety floor:
//!
//! ```text
//! target = max(rolling_mean, ewma, min_target)
//! ```
//!
//! * the **rolling mean** over the last `rm_window_weeks` completed weeks
//!   (a partial window is averaged over the weeks actually present), which
//!   anchors the target to sustained behaviour, and
//! * the **EWMA** (`alpha * latest + (1 - alpha) * previous`), which reacts
//!   quickly to upswings but decays gradually after a heavy week so the
//!   target ramps down rather than collapsing.
//!
//! Taking the max means a detraining user is nudged by whichever memory of
//! their recent fitness is higher, while `min_target` keeps the
//! recommendation meaningful for brand-new or long-idle users.
//!
//! Weeks are calendar-aligned (configurable start day). Weeks with no data
//! enter the history as zeros — an unworn device does not preserve the
//! target forever. The state advances week by week through
//! [`compute_target`]; [`fold_weeks`] drives it across a whole history,
//! including gap filling.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::domain::{DomainError, TargetConfig};
use crate::load::DailySummary;

/// Aggregation or target-state failure.
#[derive(Debug, Error, PartialEq)]
pub enum TargetError {
    #[error("week starting {found} is not aligned to {expected_day:?}")]
    MisalignedWeekStart { found: NaiveDate, expected_day: Weekday },
    #[error("expected week starting {expected}, found {found}")]
    NonContiguousWeek { expected: NaiveDate, found: NaiveDate },
    #[error("week starting {found} does not advance past {last}")]
    RegressingWeek { last: NaiveDate, found: NaiveDate },
    #[error("day {date} is outside the week starting {week_start}")]
    DayOutsideWeek { date: NaiveDate, week_start: NaiveDate },
    #[error("duplicate daily summary for {date}")]
    DuplicateDay { date: NaiveDate },
    #[error("invalid weekly load: {0}")]
    InvalidWeek(String),
    #[error("invalid target state: {0}")]
    InvalidState(String),
}

// ---------------------------------------------------------------------------
// Weekly loads
// ---------------------------------------------------------------------------

/// Total Cardio Load accrued in one calendar week.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyLoad {
    week_start: NaiveDate,
    total_load: f64,
    observed_days: u32,
}

impl WeeklyLoad {
    /// Builds a weekly load, requiring a finite non-negative total and at
    /// most seven observed days.
    pub fn new(week_start: NaiveDate, total_load: f64, observed_days: u32) -> Result<Self, TargetError> {
        if !total_load.is_finite() || total_load < 0.0 {
            return Err(TargetError::InvalidWeek(format!(
                "total_load must be finite and non-negative, got {total_load}"
            )));
        }
        if observed_days > 7 {
            return Err(TargetError::InvalidWeek(format!(
                "observed_days must be at most 7, got {observed_days}"
            )));
        }
        Ok(Self { week_start, total_load, observed_days })
    }

    pub fn week_start(&self) -> NaiveDate {
        self.week_start
    }

    pub fn total_load(&self) -> f64 {
        self.total_load
    }

    pub fn observed_days(&self) -> u32 {
        self.observed_days
    }
}

/// First day of the calendar week containing `date`.
pub fn week_start_for(date: NaiveDate, week_start_day: Weekday) -> NaiveDate {
    let offset = (date.weekday().num_days_from_monday() + 7
        - week_start_day.num_days_from_monday())
        % 7;
    date - Duration::days(i64::from(offset))
}

/// Sums one calendar week of daily summaries into a [`WeeklyLoad`].
///
/// Every day must fall inside `[week_start, week_start + 7)` and dates must
/// be unique. Missing days simply contribute nothing; `observed_days`
/// counts the summaries whose wear coverage met the threshold.
pub fn weekly_load(days: &[DailySummary], week_start: NaiveDate) -> Result<WeeklyLoad, TargetError> {
    let mut sorted: Vec<&DailySummary> = days.iter().collect();
    sorted.sort_by_key(|d| d.date());
    let mut total = 0.0;
    let mut observed = 0u32;
    let mut prev: Option<NaiveDate> = None;
    for day in sorted {
        let date = day.date();
        if date < week_start || date >= week_start + Duration::days(7) {
            return Err(TargetError::DayOutsideWeek { date, week_start });
        }
        if prev == Some(date) {
            return Err(TargetError::DuplicateDay { date });
        }
        prev = Some(date);
        total += day.total_load();
        if day.observed() {
            observed += 1;
        }
    }
    WeeklyLoad::new(week_start, total, observed)
}

/// Buckets daily summaries into calendar weeks, in week order.
///
/// The result may contain holes (weeks with no days at all produce no
/// entry); [`fold_weeks`] fills those with zeros when advancing the target.
pub fn group_days_into_weeks(
    days: &[DailySummary],
    config: &TargetConfig,
) -> Result<Vec<WeeklyLoad>, TargetError> {
    let mut buckets: std::collections::BTreeMap<NaiveDate, Vec<DailySummary>> =
        std::collections::BTreeMap::new();
    for day in days {
        buckets
            .entry(week_start_for(day.date(), config.week_start_day()))
            .or_default()
            .push(day.clone());
    }
    buckets
        .iter()
        .map(|(&start, bucket)| weekly_load(bucket, start))
        .collect()
}

// ---------------------------------------------------------------------------
// Target state
// ---------------------------------------------------------------------------

/// How much history backs the current target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// No completed weeks yet; the target is the configured minimum.
    OnboardingMinimum,
    /// Some weeks observed, fewer than the full rolling-mean window.
    PartialPersonalized,
    /// A full window of weeks backs the target.
    FullyPersonalized,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::OnboardingMinimum => "onboarding_minimum",
            Phase::PartialPersonalized => "partial_personalized",
            Phase::FullyPersonalized => "fully_personalized",
        })
    }
}

/// The evolving target computation: the EWMA, the rolling-mean window, and
/// the target currently in force.
///
/// The state is advanced one completed week at a time by [`compute_target`]
/// and persists between runs via [`TargetState::to_json_string`] /
/// [`TargetState::from_json_str`].
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    ewma: Option<f64>,
    recent_weeks: Vec<WeeklyLoad>,
    phase: Phase,
    current_target: f64,
}

impl TargetState {
    /// The state before any week has completed: empty window, no EWMA, and
    /// the minimum target in force.
    pub fn initial(config: &TargetConfig) -> Self {
        Self {
            ewma: None,
            recent_weeks: Vec::new(),
            phase: Phase::OnboardingMinimum,
            current_target: config.min_target(),
        }
    }

    /// EWMA of weekly loads, absent until the first week completes.
    pub fn ewma(&self) -> Option<f64> {
        self.ewma
    }

    /// The rolling-mean window, oldest first. At most `rm_window_weeks`
    /// entries, always contiguous calendar weeks.
    pub fn recent_weeks(&self) -> &[WeeklyLoad] {
        &self.recent_weeks
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// The weekly target currently in force.
    pub fn current_target(&self) -> f64 {
        self.current_target
    }

    /// Serializes the state for persistence between runs.
    pub fn to_json_string(&self) -> String {
        let raw = StateFile {
            ewma: self.ewma,
            recent_weeks: self
                .recent_weeks
                .iter()
                .map(|w| WeekFile {
                    week_start: w.week_start(),
                    total_load: w.total_load(),
                    observed_days: w.observed_days(),
                })
                .collect(),
            phase: self.phase,
            current_target: self.current_target,
        };
        serde_json::to_string_pretty(&raw).expect("state serialization cannot fail")
    }

    /// Parses and structurally validates a persisted state.
    ///
    /// The window must hold contiguous weeks aligned to the configured week
    /// start, sized within the rolling-mean window, with the phase and EWMA
    /// presence matching the window length. A state that fails these checks
    /// cannot be advanced and must be rebuilt from history.
    pub fn from_json_str(s: &str, config: &TargetConfig) -> Result<Self, TargetError> {
        let raw: StateFile =
            serde_json::from_str(s).map_err(|e| TargetError::InvalidState(e.to_string()))?;
        let mut weeks = Vec::with_capacity(raw.recent_weeks.len());
        for w in raw.recent_weeks {
            weeks.push(WeeklyLoad::new(w.week_start, w.total_load, w.observed_days)?);
        }
        if weeks.len() > config.rm_window_weeks() {
            return Err(TargetError::InvalidState(format!(
                "window holds {} weeks but rm_window_weeks is {}",
                weeks.len(),
                config.rm_window_weeks()
            )));
        }
        for w in &weeks {
            if w.week_start().weekday() != config.week_start_day() {
                return Err(TargetError::InvalidState(format!(
                    "week starting {} is not aligned to {:?}",
                    w.week_start(),
                    config.week_start_day()
                )));
            }
        }
        for pair in weeks.windows(2) {
            let expected = pair[0].week_start() + Duration::days(7);
            if pair[1].week_start() != expected {
                return Err(TargetError::InvalidState(format!(
                    "window is not contiguous: {} is not followed by {}",
                    pair[0].week_start(),
                    expected
                )));
            }
        }
        let expected_phase = phase_for(weeks.len(), config.rm_window_weeks());
        if raw.phase != expected_phase {
            return Err(TargetError::InvalidState(format!(
                "phase {} does not match a window of {} weeks",
                raw.phase,
                weeks.len()
            )));
        }
        if raw.ewma.is_some() != !weeks.is_empty() {
            return Err(TargetError::InvalidState(
                "ewma must be present exactly when the window is non-empty".into(),
            ));
        }
        if let Some(e) = raw.ewma {
            if !e.is_finite() || e < 0.0 {
                return Err(TargetError::InvalidState(format!(
                    "ewma must be finite and non-negative, got {e}"
                )));
            }
        }
        if !raw.current_target.is_finite() || raw.current_target < 0.0 {
            return Err(TargetError::InvalidState(format!(
                "current_target must be finite and non-negative, got {}",
                raw.current_target
            )));
        }
        Ok(Self {
            ewma: raw.ewma,
            recent_weeks: weeks,
            phase: raw.phase,
            current_target: raw.current_target,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    ewma: Option<f64>,
    recent_weeks: Vec<WeekFile>,
    phase: Phase,
    current_target: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeekFile {
    week_start: NaiveDate,
    total_load: f64,
    observed_days: u32,
}

fn phase_for(window_len: usize, window_size: usize) -> Phase {
    if window_len == 0 {
        Phase::OnboardingMinimum
    } else if window_len < window_size {
        Phase::PartialPersonalized
    } else {
        Phase::FullyPersonalized
    }
}

// ---------------------------------------------------------------------------
// Target arithmetic
// ---------------------------------------------------------------------------

/// Mean of the weekly loads present, or `None` for an empty window.
///
/// A partial window averages over the weeks actually observed; it is not
/// padded with zeros.
pub fn rolling_mean(weeks: &[WeeklyLoad]) -> Option<f64> {
    if weeks.is_empty() {
        return None;
    }
    let sum: f64 = weeks.iter().map(|w| w.total_load()).sum();
    Some(sum / weeks.len() as f64)
}

/// One EWMA step. The first observation seeds the average directly.
pub fn ewma_update(previous: Option<f64>, latest: f64, alpha: f64) -> f64 {
    match previous {
        None => latest,
        Some(prev) => alpha * latest + (1.0 - alpha) * prev,
    }
}

/// Advances the state by one completed week and recomputes the target.
///
/// The week must be aligned to the configured week start and must be
/// exactly the week following the window (use [`fill_gap_weeks`] or
/// [`fold_weeks`] when history has holes).
pub fn compute_target(
    state: &TargetState,
    week: &WeeklyLoad,
    config: &TargetConfig,
) -> Result<TargetState, TargetError> {
    if week.week_start().weekday() != config.week_start_day() {
        return Err(TargetError::MisalignedWeekStart {
            found: week.week_start(),
            expected_day: config.week_start_day(),
        });
    }
    if let Some(last) = state.recent_weeks.last() {
        let expected = last.week_start() + Duration::days(7);
        if week.week_start() != expected {
            return Err(TargetError::NonContiguousWeek { expected, found: week.week_start() });
        }
    }
    Ok(advance(state, week, config))
}

/// Core state transition; callers have already validated week placement.
fn advance(state: &TargetState, week: &WeeklyLoad, config: &TargetConfig) -> TargetState {
    let mut weeks = state.recent_weeks.clone();
    weeks.push(week.clone());
    if weeks.len() > config.rm_window_weeks() {
        weeks.remove(0);
    }
    let ewma = ewma_update(state.ewma, week.total_load(), config.ewma_alpha());
    let rm = rolling_mean(&weeks).expect("window is non-empty after push");
    let target = rm.max(ewma).max(config.min_target());
    TargetState {
        ewma: Some(ewma),
        phase: phase_for(weeks.len(), config.rm_window_weeks()),
        recent_weeks: weeks,
        current_target: target,
    }
}

/// Feeds `gap_weeks` consecutive zero-load weeks into the state, as when
/// the device sat in a drawer: the rolling mean dilutes and the EWMA decays,
/// so the target ramps down instead of freezing at its old value.
///
/// A state with no observed weeks has no calendar anchor, so there is
/// nothing to fill and the state is returned unchanged.
pub fn fill_gap_weeks(state: &TargetState, gap_weeks: usize, config: &TargetConfig) -> TargetState {
    let mut state = state.clone();
    for _ in 0..gap_weeks {
        let Some(last) = state.recent_weeks.last() else {
            break;
        };
        let start = last.week_start() + Duration::days(7);
        let zero = WeeklyLoad::new(start, 0.0, 0).expect("zero week is always valid");
        state = advance(&state, &zero, config);
    }
    state
}

// ---------------------------------------------------------------------------
// Status
// ---------------------------------------------------------------------------

/// How an accrued weekly load compares to the target in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatusKind {
    /// Under target (`ratio < 1`).
    Below,
    /// On target, up to and including the over-reach boundary.
    Met,
    /// Past the over-reach boundary (`ratio > overreach_ratio`).
    Overreached,
}

impl fmt::Display for StatusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatusKind::Below => "below",
            StatusKind::Met => "met",
            StatusKind::Overreached => "overreached",
        })
    }
}

/// Target comparison: the classification and the raw accrued/target ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetStatus {
    status: StatusKind,
    ratio: f64,
}

impl TargetStatus {
    pub fn status(&self) -> StatusKind {
        self.status
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// Classifies `accrued` against `target`.
///
/// Both boundaries are inclusive on the "met" side: exactly on target is
/// met, and exactly at `overreach_ratio` is still met. A non-positive
/// target (possible only when `min_target` is configured to zero) counts as
/// met at zero accrued and over-reached otherwise.
pub fn target_status(accrued: f64, target: f64, config: &TargetConfig) -> TargetStatus {
    if target <= 0.0 {
        return if accrued > 0.0 {
            TargetStatus { status: StatusKind::Overreached, ratio: f64::INFINITY }
        } else {
            TargetStatus { status: StatusKind::Met, ratio: 1.0 }
        };
    }
    let ratio = accrued / target;
    let status = if ratio < 1.0 {
        StatusKind::Below
    } else if ratio <= config.overreach_ratio() {
        StatusKind::Met
    } else {
        StatusKind::Overreached
    };
    TargetStatus { status, ratio }
}

// ---------------------------------------------------------------------------
// Folding a history
// ---------------------------------------------------------------------------

/// One processed week in a [`fold_weeks`] run.
///
/// `status` compares the week's accrued load against `previous_target` —
/// the target that was in force *while the user was living that week*.
/// `target` is the freshly recomputed value that takes effect for the next
/// week.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRow {
    pub week_start: NaiveDate,
    pub total_load: f64,
    pub observed_days: u32,
    pub rolling_mean: f64,
    pub ewma: f64,
    pub previous_target: f64,
    pub target: f64,
    pub phase: Phase,
    pub status: TargetStatus,
}

/// Drives the state across a sorted run of weekly loads, filling calendar
/// holes with zero weeks, and reports one row per week processed (including
/// the synthesized zeros).
///
/// Weeks must be aligned, strictly increasing, and not regress behind the
/// existing window; a history that violates this cannot be folded.
pub fn fold_weeks(
    state: &TargetState,
    weeks: &[WeeklyLoad],
    config: &TargetConfig,
) -> Result<(TargetState, Vec<TargetRow>), TargetError> {
    let mut state = state.clone();
    let mut rows = Vec::new();
    let mut step = |state: &TargetState, week: &WeeklyLoad| -> TargetState {
        let previous_target = state.current_target();
        let next = advance(state, week, config);
        rows.push(TargetRow {
            week_start: week.week_start(),
            total_load: week.total_load(),
            observed_days: week.observed_days(),
            rolling_mean: rolling_mean(next.recent_weeks()).expect("non-empty after advance"),
            ewma: next.ewma().expect("present after advance"),
            previous_target,
            target: next.current_target(),
            phase: next.phase(),
            status: target_status(week.total_load(), previous_target, config),
        });
        next
    };
    for week in weeks {
        if week.week_start().weekday() != config.week_start_day() {
            return Err(TargetError::MisalignedWeekStart {
                found: week.week_start(),
                expected_day: config.week_start_day(),
            });
        }
        if let Some(last) = state.recent_weeks.last() {
            let expected = last.week_start() + Duration::days(7);
            if week.week_start() < expected {
                return Err(TargetError::RegressingWeek {
                    last: last.week_start(),
                    found: week.week_start(),
                });
            }
            let mut cursor = expected;
            while cursor < week.week_start() {
                let zero = WeeklyLoad::new(cursor, 0.0, 0).expect("zero week is always valid");
                state = step(&state, &zero);
                cursor += Duration::days(7);
            }
        }
        state = step(&state, week);
    }
    Ok((state, rows))
}

/// Converts a domain error into the target error space (used by callers
/// that mix config parsing with state handling).
impl From<DomainError> for TargetError {
    fn from(e: DomainError) -> Self {
        TargetError::InvalidState(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn wk(start: &str, load: f64) -> WeeklyLoad {
        WeeklyLoad::new(d(start), load, 7).unwrap()
    }

    fn cfg() -> TargetConfig {
        TargetConfig::default()
    }

    #[test]
    fn week_start_snaps_backwards_to_the_configured_day() {
        // 2024-05-01 is a Wednesday.
        assert_eq!(week_start_for(d("2024-05-01"), Weekday::Mon), d("2024-04-29"));
        assert_eq!(week_start_for(d("2024-05-01"), Weekday::Sun), d("2024-04-28"));
        assert_eq!(week_start_for(d("2024-04-29"), Weekday::Mon), d("2024-04-29"));
        assert_eq!(week_start_for(d("2024-05-05"), Weekday::Mon), d("2024-04-29"));
    }

    fn day(date: &str, load: f64, observed: bool) -> DailySummary {
        DailySummary::new(d(date), load, 0.0, load, if observed { 800 } else { 100 }, observed)
            .unwrap()
    }

    #[test]
    fn weekly_load_sums_days_and_counts_observed() {
        let days: Vec<_> = (1..=7)
            .map(|i| day(&format!("2024-04-2{}", i + 1), 10.0 * i as f64, i <= 5))
            .collect();
        // 2024-04-22 is a Monday; days run Mon..Sun.
        let week = weekly_load(&days, d("2024-04-22")).unwrap();
        assert_eq!(week.total_load(), 280.0);
        assert_eq!(week.observed_days(), 5);
    }

    #[test]
    fn weekly_load_accepts_missing_days_but_not_strays() {
        let days = vec![day("2024-04-23", 50.0, true)];
        let week = weekly_load(&days, d("2024-04-22")).unwrap();
        assert_eq!(week.total_load(), 50.0);
        assert_eq!(week.observed_days(), 1);

        let stray = vec![day("2024-04-29", 50.0, true)];
        assert_eq!(
            weekly_load(&stray, d("2024-04-22")).unwrap_err(),
            TargetError::DayOutsideWeek { date: d("2024-04-29"), week_start: d("2024-04-22") }
        );

        let dup = vec![day("2024-04-23", 50.0, true), day("2024-04-23", 30.0, true)];
        assert_eq!(
            weekly_load(&dup, d("2024-04-22")).unwrap_err(),
            TargetError::DuplicateDay { date: d("2024-04-23") }
        );
    }

    #[test]
    fn grouping_buckets_by_calendar_week() {
        let days = vec![
            day("2024-04-28", 10.0, true), // Sunday -> week of Apr 22
            day("2024-04-29", 20.0, true), // Monday -> week of Apr 29
            day("2024-05-05", 30.0, true), // Sunday -> week of Apr 29
        ];
        let weeks = group_days_into_weeks(&days, &cfg()).unwrap();
        assert_eq!(weeks.len(), 2);
        assert_eq!(weeks[0].week_start(), d("2024-04-22"));
        assert_eq!(weeks[0].total_load(), 10.0);
        assert_eq!(weeks[1].week_start(), d("2024-04-29"));
        assert_eq!(weeks[1].total_load(), 50.0);
    }

    #[test]
    fn rolling_mean_handles_empty_and_partial_windows() {
        assert_eq!(rolling_mean(&[]), None);
        assert_eq!(rolling_mean(&[wk("2024-04-22", 300.0)]), Some(300.0));
        let weeks = [
            wk("2024-04-01", 200.0),
            wk("2024-04-08", 300.0),
            wk("2024-04-15", 400.0),
            wk("2024-04-22", 500.0),
        ];
        assert_eq!(rolling_mean(&weeks), Some(350.0));
    }

    #[test]
    fn ewma_seeds_then_blends() {
        assert_eq!(ewma_update(None, 300.0, 0.4), 300.0);
        assert_eq!(ewma_update(Some(300.0), 500.0, 0.4), 380.0);
        assert_eq!(ewma_update(Some(400.0), 100.0, 0.25), 325.0);
    }

    #[test]
    fn target_is_the_max_of_mean_ewma_and_floor() {
        let c = cfg();
        let mut state = TargetState::initial(&c);
        for (start, load) in [
            ("2024-04-01", 200.0),
            ("2024-04-08", 300.0),
            ("2024-04-15", 400.0),
            ("2024-04-22", 500.0),
        ] {
            state = compute_target(&state, &wk(start, load), &c).unwrap();
        }
        // EWMA: 200 -> 240 -> 304 -> 382.4 outruns the mean of 350.
        let ewma = 0.4 * 500.0 + 0.6 * (0.4 * 400.0 + 0.6 * (0.4 * 300.0 + 0.6 * 200.0));
        assert_eq!(state.ewma(), Some(ewma));
        assert_relative_eq!(ewma, 382.4, max_relative = 1e-12);
        assert_eq!(state.current_target(), ewma.max(350.0));
        assert_eq!(state.phase(), Phase::FullyPersonalized);
    }

    #[test]
    fn minimum_target_floors_tiny_histories() {
        let c = cfg();
        let mut state = TargetState::initial(&c);
        assert_eq!(state.current_target(), 50.0);
        assert_eq!(state.phase(), Phase::OnboardingMinimum);
        state = compute_target(&state, &wk("2024-04-22", 10.0), &c).unwrap();
        state = compute_target(&state, &wk("2024-04-29", 5.0), &c).unwrap();
        // mean 7.5, ewma 7: both under the floor.
        assert_eq!(state.current_target(), 50.0);
        assert_eq!(state.phase(), Phase::PartialPersonalized);
    }

    #[test]
    fn steady_history_converges_on_itself() {
        let c = cfg();
        let mut state = TargetState::initial(&c);
        for i in 0..4 {
            let start = d("2024-04-01") + Duration::days(7 * i);
            state = compute_target(&state, &WeeklyLoad::new(start, 400.0, 7).unwrap(), &c).unwrap();
            assert_eq!(state.current_target(), 400.0);
        }
        assert_eq!(state.ewma(), Some(400.0));
        assert_eq!(state.phase(), Phase::FullyPersonalized);
    }

    #[test]
    fn phases_progress_with_window_fill() {
        let c = cfg();
        let mut state = TargetState::initial(&c);
        let mut phases = vec![state.phase()];
        for i in 0..4 {
            let start = d("2024-04-01") + Duration::days(7 * i);
            state = compute_target(&state, &WeeklyLoad::new(start, 300.0, 7).unwrap(), &c).unwrap();
            phases.push(state.phase());
        }
        assert_eq!(
            phases,
            vec![
                Phase::OnboardingMinimum,
                Phase::PartialPersonalized,
                Phase::PartialPersonalized,
                Phase::PartialPersonalized,
                Phase::FullyPersonalized,
            ]
        );
    }

    #[test]
    fn compute_target_rejects_misaligned_or_skipped_weeks() {
        let c = cfg();
        let state = compute_target(&TargetState::initial(&c), &wk("2024-04-22", 300.0), &c).unwrap();
        // 2024-04-30 is a Tuesday.
        assert!(matches!(
            compute_target(&state, &wk("2024-04-30", 300.0), &c),
            Err(TargetError::MisalignedWeekStart { .. })
        ));
        assert_eq!(
            compute_target(&state, &wk("2024-05-06", 300.0), &c).unwrap_err(),
            TargetError::NonContiguousWeek { expected: d("2024-04-29"), found: d("2024-05-06") }
        );
    }

    #[test]
    fn gap_weeks_decay_the_target() {
        let c = cfg();
        let mut state = TargetState::initial(&c);
        for i in 0..4 {
            let start = d("2024-04-01") + Duration::days(7 * i);
            state = compute_target(&state, &WeeklyLoad::new(start, 400.0, 7).unwrap(), &c).unwrap();
        }
        let after_one = fill_gap_weeks(&state, 1, &c);
        // EWMA 0.6 * 400 = 240; window [400, 400, 400, 0] means 300.
        assert_eq!(after_one.ewma(), Some(240.0));
        assert_eq!(after_one.current_target(), 300.0);
        let after_two = fill_gap_weeks(&state, 2, &c);
        assert_eq!(after_two.ewma(), Some(144.0));
        assert_eq!(after_two.current_target(), 200.0);
        // Eventually the floor takes over.
        let after_many = fill_gap_weeks(&state, 10, &c);
        assert_eq!(after_many.current_target(), 50.0);
    }

    #[test]
    fn gap_fill_without_history_is_a_noop() {
        let c = cfg();
        let state = TargetState::initial(&c);
        assert_eq!(fill_gap_weeks(&state, 5, &c), state);
    }

    #[test]
    fn status_boundaries_are_inclusive_for_met() {
        let c = cfg();
        let s = target_status(150.0, 300.0, &c);
        assert_eq!((s.status(), s.ratio()), (StatusKind::Below, 0.5));
        let s = target_status(300.0, 300.0, &c);
        assert_eq!((s.status(), s.ratio()), (StatusKind::Met, 1.0));
        let s = target_status(450.0, 300.0, &c);
        assert_eq!((s.status(), s.ratio()), (StatusKind::Met, 1.5));
        let s = target_status(480.0, 300.0, &c);
        assert_eq!((s.status(), s.ratio()), (StatusKind::Overreached, 1.6));
    }

    #[test]
    fn state_json_round_trips() {
        let c = cfg();
        let mut state = TargetState::initial(&c);
        for (start, load) in [("2024-04-15", 250.0), ("2024-04-22", 320.0)] {
            state = compute_target(&state, &wk(start, load), &c).unwrap();
        }
        let parsed = TargetState::from_json_str(&state.to_json_string(), &c).unwrap();
        assert_eq!(parsed, state);
    }

    #[test]
    fn state_json_rejects_structural_corruption() {
        let c = cfg();
        // Non-contiguous window.
        let bad = r#"{
            "ewma": 300.0,
            "recent_weeks": [
                {"week_start": "2024-04-01", "total_load": 300.0, "observed_days": 7},
                {"week_start": "2024-04-15", "total_load": 300.0, "observed_days": 7}
            ],
            "phase": "partial_personalized",
            "current_target": 300.0
        }"#;
        assert!(matches!(
            TargetState::from_json_str(bad, &c),
            Err(TargetError::InvalidState(_))
        ));
        // Phase inconsistent with window length.
        let bad = r#"{
            "ewma": 300.0,
            "recent_weeks": [
                {"week_start": "2024-04-01", "total_load": 300.0, "observed_days": 7}
            ],
            "phase": "fully_personalized",
            "current_target": 300.0
        }"#;
        assert!(matches!(
            TargetState::from_json_str(bad, &c),
            Err(TargetError::InvalidState(_))
        ));
        // Missing EWMA with a non-empty window.
        let bad = r#"{
            "ewma": null,
            "recent_weeks": [
                {"week_start": "2024-04-01", "total_load": 300.0, "observed_days": 7}
            ],
            "phase": "partial_personalized",
            "current_target": 300.0
        }"#;
        assert!(matches!(
            TargetState::from_json_str(bad, &c),
            Err(TargetError::InvalidState(_))
        ));
    }

    #[test]
    fn fold_fills_holes_with_zero_weeks() {
        let c = cfg();
        let weeks = [wk("2024-04-01", 400.0), wk("2024-04-22", 200.0)];
        let (state, rows) = fold_weeks(&TargetState::initial(&c), &weeks, &c).unwrap();
        // One real week, two synthesized zeros, one real week.
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].week_start, d("2024-04-08"));
        assert_eq!(rows[1].total_load, 0.0);
        assert_eq!(rows[2].week_start, d("2024-04-15"));
        assert_eq!(rows[2].total_load, 0.0);
        assert_eq!(state.recent_weeks().len(), 4);
        // EWMA: 400 -> 240 -> 144 -> 0.4*200 + 0.6*144 = 166.4
        assert_relative_eq!(state.ewma().unwrap(), 166.4, max_relative = 1e-12);
        // Window mean (400 + 0 + 0 + 200) / 4 = 150.
        assert_eq!(rows[3].rolling_mean, 150.0);
        // The EWMA outruns the diluted mean, so it is the target.
        assert_eq!(state.current_target(), state.ewma().unwrap());
    }

    #[test]
    fn fold_status_uses_the_target_in_force_during_the_week() {
        let c = cfg();
        let weeks = [wk("2024-04-01", 400.0), wk("2024-04-08", 100.0)];
        let (_, rows) = fold_weeks(&TargetState::initial(&c), &weeks, &c).unwrap();
        // Week one is judged against the onboarding minimum of 50.
        assert_eq!(rows[0].previous_target, 50.0);
        assert_eq!(rows[0].status.status(), StatusKind::Overreached);
        // Week two is judged against the 400 target produced by week one.
        assert_eq!(rows[1].previous_target, 400.0);
        assert_eq!(rows[1].status.status(), StatusKind::Below);
        assert_eq!(rows[1].status.ratio(), 0.25);
    }

    #[test]
    fn fold_rejects_regressing_weeks() {
        let c = cfg();
        let (state, _) =
            fold_weeks(&TargetState::initial(&c), &[wk("2024-04-08", 300.0)], &c).unwrap();
        let err = fold_weeks(&state, &[wk("2024-04-08", 200.0)], &c).unwrap_err();
        assert_eq!(err, TargetError::RegressingWeek { last: d("2024-04-08"), found: d("2024-04-08") });
    }
}
