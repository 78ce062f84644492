//! Property and scenario tests for the weekly target engine, checked
//! against naive reimplementations of the rolling mean and EWMA.

use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

use cardioload::domain::TargetConfig;
use cardioload::synth::{gen_week_series, PatternKind, WeekPattern};
use cardioload::target::{
    compute_target, fold_weeks, StatusKind, TargetState, WeeklyLoad,
};

/// Monday anchor for all generated histories.
fn anchor() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
}

fn weeks_from_loads(loads: &[f64]) -> Vec<WeeklyLoad> {
    loads
        .iter()
        .enumerate()
        .map(|(i, &load)| {
            WeeklyLoad::new(anchor() + Duration::days(7 * i as i64), load, 7).unwrap()
        })
        .collect()
}

/// Naive week-by-week recomputation of the statistics the engine reports.
fn naive_trace(loads: &[f64], config: &TargetConfig) -> Vec<(f64, f64, f64)> {
    let mut window: Vec<f64> = Vec::new();
    let mut ewma: Option<f64> = None;
    let mut out = Vec::new();
    for &load in loads {
        window.push(load);
        if window.len() > config.rm_window_weeks() {
            window.remove(0);
        }
        let rm = window.iter().sum::<f64>() / window.len() as f64;
        let e = match ewma {
            None => load,
            Some(prev) => config.ewma_alpha() * load + (1.0 - config.ewma_alpha()) * prev,
        };
        ewma = Some(e);
        out.push((rm, e, rm.max(e).max(config.min_target())));
    }
    out
}

proptest! {
    #[test]
    fn target_is_exactly_the_max_identity_and_floored(
        loads in proptest::collection::vec(0.0..600.0_f64, 1..30),
    ) {
        let config = TargetConfig::default();
        let weeks = weeks_from_loads(&loads);
        let (_, rows) = fold_weeks(&TargetState::initial(&config), &weeks, &config).unwrap();
        let naive = naive_trace(&loads, &config);
        prop_assert_eq!(rows.len(), naive.len());
        for (row, (rm, ewma, target)) in rows.iter().zip(naive) {
            // Bit-for-bit: same arithmetic, independently sequenced.
            prop_assert_eq!(row.rolling_mean, rm);
            prop_assert_eq!(row.ewma, ewma);
            prop_assert_eq!(row.target, target);
            prop_assert_eq!(row.target, row.rolling_mean.max(row.ewma).max(config.min_target()));
            prop_assert!(row.target >= config.min_target());
        }
    }

    #[test]
    fn raising_one_week_never_lowers_a_later_target(
        loads in proptest::collection::vec(0.0..600.0_f64, 2..25),
        pick in any::<proptest::sample::Index>(),
        bump in 1.0..300.0_f64,
    ) {
        let config = TargetConfig::default();
        let idx = pick.index(loads.len());
        let mut bumped = loads.clone();
        bumped[idx] += bump;

        let (_, base_rows) =
            fold_weeks(&TargetState::initial(&config), &weeks_from_loads(&loads), &config).unwrap();
        let (_, bumped_rows) =
            fold_weeks(&TargetState::initial(&config), &weeks_from_loads(&bumped), &config).unwrap();
        for (base, after) in base_rows.iter().zip(&bumped_rows).skip(idx) {
            prop_assert!(
                after.target >= base.target,
                "target dropped at {} after raising week {idx}: {} -> {}",
                base.week_start,
                base.target,
                after.target,
            );
        }
    }

    #[test]
    fn incremental_and_batch_folds_agree_exactly(
        loads in proptest::collection::vec(0.0..600.0_f64, 1..20),
    ) {
        let config = TargetConfig::default();
        let weeks = weeks_from_loads(&loads);
        let (batch, _) = fold_weeks(&TargetState::initial(&config), &weeks, &config).unwrap();
        let mut incremental = TargetState::initial(&config);
        for week in &weeks {
            incremental = compute_target(&incremental, week, &config).unwrap();
        }
        prop_assert_eq!(batch, incremental);
    }

    #[test]
    fn holes_fold_the_same_as_explicit_zero_weeks(
        head in proptest::collection::vec(0.0..600.0_f64, 1..6),
        hole in 1usize..5,
        tail in proptest::collection::vec(0.0..600.0_f64, 1..6),
    ) {
        let config = TargetConfig::default();
        let start_of = |i: usize| anchor() + Duration::days(7 * i as i64);
        let mut explicit_weeks = Vec::new();
        for (i, &load) in head.iter().enumerate() {
            explicit_weeks.push(WeeklyLoad::new(start_of(i), load, 7).unwrap());
        }
        for j in 0..hole {
            // Unobserved weeks carry zero days, matching what a fold
            // synthesizes for a calendar hole.
            explicit_weeks.push(WeeklyLoad::new(start_of(head.len() + j), 0.0, 0).unwrap());
        }
        for (i, &load) in tail.iter().enumerate() {
            explicit_weeks.push(WeeklyLoad::new(start_of(head.len() + hole + i), load, 7).unwrap());
        }

        // Same history with the zero weeks physically missing.
        let mut gappy: Vec<WeeklyLoad> = explicit_weeks[..head.len()].to_vec();
        gappy.extend_from_slice(&explicit_weeks[head.len() + hole..]);

        let (a, rows_a) = fold_weeks(&TargetState::initial(&config), &explicit_weeks, &config).unwrap();
        let (b, rows_b) = fold_weeks(&TargetState::initial(&config), &gappy, &config).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(rows_a, rows_b);
    }

    #[test]
    fn constant_feed_converges_in_one_window(
        prior in proptest::collection::vec(0.0..400.0_f64, 0..12),
    ) {
        let config = TargetConfig::default();
        let level = 400.0;
        let (mut state, _) =
            fold_weeks(&TargetState::initial(&config), &weeks_from_loads(&prior), &config).unwrap();
        let mut start = anchor() + Duration::days(7 * prior.len() as i64);
        for fed in 1..=config.rm_window_weeks() {
            let before = state.ewma();
            state = compute_target(&state, &WeeklyLoad::new(start, level, 7).unwrap(), &config).unwrap();
            start += Duration::days(7);
            // |EWMA - level| contracts by exactly (1 - alpha) per step.
            if let Some(prev) = before {
                let expected = (1.0 - config.ewma_alpha()) * (prev - level).abs();
                let actual = (state.ewma().unwrap() - level).abs();
                prop_assert!(
                    (actual - expected).abs() <= 1e-12 * expected.max(1.0),
                    "contraction violated: {actual} vs {expected}",
                );
            }
            if fed == config.rm_window_weeks() {
                // Window now holds nothing but the level; EWMA cannot exceed
                // it because every input was <= level.
                prop_assert_eq!(state.current_target(), level);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario shapes
// ---------------------------------------------------------------------------

fn fold_pattern(pattern: &WeekPattern) -> Vec<cardioload::target::TargetRow> {
    let config = TargetConfig::default();
    let weeks = gen_week_series(pattern, anchor());
    let (_, rows) = fold_weeks(&TargetState::initial(&config), &weeks, &config).unwrap();
    rows
}

#[test]
fn step_up_target_is_nondecreasing_and_locks_in_after_one_window() {
    let pattern = WeekPattern::new(PatternKind::StepUp, 250.0, 400.0, 9, 18).unwrap();
    let rows = fold_pattern(&pattern);
    for pair in rows.windows(2).skip(8) {
        assert!(pair[1].target >= pair[0].target, "target regressed at {}", pair[1].week_start);
    }
    // Four weeks after the step the window is pure 400s.
    assert_eq!(rows[12].target, 400.0);
    assert!(rows[11].target < 400.0);
    assert!(rows[17].target == 400.0);
}

#[test]
fn spike_target_overshoots_then_eases_back() {
    let pattern = WeekPattern::new(PatternKind::Spike, 250.0, 450.0, 6, 18).unwrap();
    let rows = fold_pattern(&pattern);
    // Settled on the baseline before the spike.
    assert_eq!(rows[5].target, 250.0);
    // Elevated through the spike and for at least two weeks after reversion.
    for row in &rows[6..10] {
        assert!(row.target > 250.0, "target not elevated at {}", row.week_start);
    }
    // Once the spike leaves the window the mean is home; the EWMA glides in
    // from above, so the target is exactly the max identity and shrinking.
    let home = &rows[11];
    assert_eq!(home.rolling_mean, 250.0);
    assert_eq!(home.target, home.rolling_mean.max(home.ewma).max(50.0));
    for pair in rows[8..].windows(2) {
        assert!(pair[1].target <= pair[0].target);
    }
}

#[test]
fn step_down_decline_is_bounded_and_recovery_is_prompt() {
    let config = TargetConfig::default();
    let pattern = WeekPattern::new(PatternKind::StepDown, 400.0, 100.0, 5, 18).unwrap();
    let rows = fold_pattern(&pattern);
    // The per-week decline is bounded: the EWMA keeps (1 - alpha) of
    // itself, and the target never falls below the EWMA.
    for pair in rows.windows(2) {
        assert!(pair[1].target >= pair[1].ewma);
        assert!(pair[1].ewma >= (1.0 - config.ewma_alpha()) * pair[0].ewma);
    }
    // The plateau resumes at week index 9; the target is fully back no
    // later than four weeks after that.
    assert_eq!(rows[9].total_load, 400.0);
    assert_eq!(rows[12].target, 400.0);
    assert!(rows[13].target == 400.0);
}

#[test]
fn spike_weeks_read_as_overreached_against_the_standing_target() {
    let pattern = WeekPattern::new(PatternKind::Spike, 250.0, 450.0, 6, 18).unwrap();
    let rows = fold_pattern(&pattern);
    // 450 against a standing target of 250 is a 1.8 ratio.
    assert_eq!(rows[6].status.status(), StatusKind::Overreached);
    assert_eq!(rows[6].previous_target, 250.0);
    // The second spike week is judged against the already-raised target.
    assert_eq!(rows[7].status.status(), StatusKind::Met);
    assert!(rows[5].status.status() == StatusKind::Met);
}
