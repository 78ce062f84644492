//! Property tests for the minute-scoring engine, checked against a
//! deliberately naive reimplementation of the scoring rules.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use proptest::prelude::*;

use cardioload::domain::{LoadConfig, MinuteSample, TargetConfig, UserProfile, WorkoutSession};
use cardioload::load::{attribute_minutes, daily_summaries, minute_load, score_minutes};
use cardioload::synth::{gen_day, sessions_for_plan, DayPlan, HrBlock};

/// Straight-line rewrite of the scoring rules, sharing no code with the
/// engine: clamp, floor, movement gate, down-weight band, impulse.
fn naive_minute_points(sample: &MinuteSample, profile: &UserProfile, config: &LoadConfig) -> f64 {
    if !sample.worn() {
        return 0.0;
    }
    let Some(hr) = sample.hr_bpm() else { return 0.0 };
    let mut pct = (hr - profile.resting_hr()) / (profile.max_hr() - profile.resting_hr());
    pct = pct.clamp(0.0, 1.0);
    if pct < config.hrr_floor() || !sample.moving() {
        return 0.0;
    }
    let impulse =
        config.banister_scale() * pct * (profile.sex_coefficient_k() * pct).exp();
    if pct < config.downweight_band_end() {
        config.downweight_factor() * impulse
    } else {
        impulse
    }
}

fn day_start(date: NaiveDate) -> DateTime<Utc> {
    date.and_hms_opt(0, 0, 0).unwrap().and_utc()
}

fn arb_profile() -> impl Strategy<Value = UserProfile> {
    (35.0..75.0_f64, 160.0..210.0_f64, 0.5..4.0_f64)
        .prop_map(|(rest, max, k)| UserProfile::new("prop", k, rest, max).unwrap())
}

/// A day plan with up to three well-separated blocks, so block validity
/// never depends on the drawn values.
fn arb_plan() -> impl Strategy<Value = DayPlan> {
    let block = |slot_start: u32| {
        (5u32..50, 0.25..0.95_f64)
            .prop_map(move |(dur, pct)| HrBlock::new(slot_start, dur, pct).unwrap())
    };
    (
        proptest::option::of(block(420)),
        proptest::option::of(block(720)),
        proptest::option::of(block(1020)),
        0.0..4.0_f64,
        0.0..3.0_f64,
        any::<u64>(),
    )
        .prop_map(|(a, b, c, ambient, noise, seed)| {
            let blocks: Vec<HrBlock> = [a, b, c].into_iter().flatten().collect();
            DayPlan::new(60.0, blocks, ambient, noise, seed).unwrap()
        })
}

proptest! {
    #[test]
    fn scores_are_nonnegative_and_intensity_is_clamped(
        profile in arb_profile(),
        hr in 20.0..250.0_f64,
        moving in any::<bool>(),
    ) {
        let t = day_start(NaiveDate::from_ymd_opt(2024, 5, 1).unwrap());
        let sample = MinuteSample::new(t, Some(hr), moving, true).unwrap();
        let detail = minute_load(&sample, &profile, &LoadConfig::default());
        prop_assert!(detail.load_points() >= 0.0);
        let pct = detail.pct_hrr().unwrap();
        prop_assert!((0.0..=1.0).contains(&pct));
    }

    #[test]
    fn score_is_nondecreasing_in_heart_rate(
        profile in arb_profile(),
        lo in 20.0..250.0_f64,
        delta in 0.0..100.0_f64,
    ) {
        let hi = (lo + delta).min(250.0);
        let t = day_start(NaiveDate::from_ymd_opt(2024, 5, 1).unwrap());
        let config = LoadConfig::default();
        let low = minute_load(&MinuteSample::new(t, Some(lo), true, true).unwrap(), &profile, &config);
        let high = minute_load(&MinuteSample::new(t, Some(hi), true, true).unwrap(), &profile, &config);
        prop_assert!(high.load_points() >= low.load_points());
    }

    #[test]
    fn every_minute_matches_the_naive_oracle(
        profile in arb_profile(),
        plan in arb_plan(),
    ) {
        let date = NaiveDate::from_ymd_opt(2024, 5, 1).unwrap();
        let config = LoadConfig::default();
        let samples = gen_day(&plan, &profile, date);
        let details = score_minutes(&samples, &profile, &config);
        for (sample, detail) in samples.iter().zip(&details) {
            let expected = naive_minute_points(sample, &profile, &config);
            let diff = (detail.load_points() - expected).abs();
            prop_assert!(
                diff <= 1e-9 * expected.max(1.0),
                "minute {} diverged: {} vs {expected}",
                sample.timestamp(),
                detail.load_points(),
            );
        }
    }

    #[test]
    fn day_partition_is_exact_and_matches_recomputation(
        profile in arb_profile(),
        plan in arb_plan(),
    ) {
        let date = NaiveDate::from_ymd_opt(2024, 5, 1).unwrap();
        let load_config = LoadConfig::default();
        let target_config = TargetConfig::default();
        let samples = gen_day(&plan, &profile, date);
        let sessions = sessions_for_plan(&plan, date);
        let details = attribute_minutes(score_minutes(&samples, &profile, &load_config), &sessions).unwrap();
        let days = daily_summaries(&details, chrono_tz::UTC, &target_config).unwrap();
        prop_assert_eq!(days.len(), 1);
        let day = &days[0];

        // The partition identity is exact, not approximate.
        prop_assert_eq!(day.workout_load() + day.incidental_load(), day.total_load());

        // And the totals agree with a naive per-minute recomputation.
        let mut workout = 0.0;
        let mut incidental = 0.0;
        for sample in &samples {
            let points = naive_minute_points(sample, &profile, &load_config);
            if sessions.iter().any(|s| s.contains(sample.timestamp())) {
                workout += points;
            } else {
                incidental += points;
            }
        }
        let total = workout + incidental;
        prop_assert!((day.total_load() - total).abs() <= 1e-9 * total.max(1.0));
        prop_assert!((day.workout_load() - workout).abs() <= 1e-9 * workout.max(1.0));
        prop_assert!((day.incidental_load() - incidental).abs() <= 1e-9 * incidental.max(1.0));
    }

    #[test]
    fn attribution_marks_exactly_the_session_minutes(
        start_offset in 0i64..600,
        len in 1i64..120,
        span in 600i64..1440,
    ) {
        let date = NaiveDate::from_ymd_opt(2024, 5, 1).unwrap();
        let t0 = day_start(date);
        let profile = UserProfile::new("prop", 1.92, 60.0, 190.0).unwrap();
        let config = LoadConfig::default();
        let samples: Vec<MinuteSample> = (0..span)
            .map(|i| MinuteSample::new(t0 + Duration::minutes(i), Some(120.0), true, true).unwrap())
            .collect();
        let session = WorkoutSession::new(
            t0 + Duration::minutes(start_offset),
            t0 + Duration::minutes(start_offset + len),
            cardioload::domain::SessionSource::Auto,
            None,
        )
        .unwrap();
        let details = attribute_minutes(
            score_minutes(&samples, &profile, &config),
            std::slice::from_ref(&session),
        )
        .unwrap();
        let marked = details.iter().filter(|d| d.in_workout()).count() as i64;
        prop_assert_eq!(marked, len.min(span - start_offset).max(0));
        for d in &details {
            let inside = d.timestamp() >= session.start() && d.timestamp() < session.end();
            prop_assert_eq!(d.in_workout(), inside);
        }
    }
}
