use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use pheno_pipeline::{
    admissible_stages, predict_continuous, train_stage_regressors, DatedSamples, PhenoError,
    ReferenceParcel, Stage, DEFAULT_SLOPE_STEP, DEFAULT_TW,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn curve(day: u32) -> f64 {
    let d = day as f64;
    match day {
        0..=150 => 0.20 + (d - 100.0) * 0.002,
        151..=195 => 0.30 + (d - 150.0) * (0.25 / 45.0),
        196..=246 => 0.55 + (d - 196.0) * (0.30 / 50.0),
        247..=275 => 0.85 - (d - 246.0) * (0.15 / 29.0),
        _ => 0.70 - (d - 275.0) * (0.30 / 45.0),
    }
}

fn series() -> Vec<(u32, f64)> {
    (100..=320).step_by(5).map(|d| (d, curve(d))).collect()
}

fn reference() -> ReferenceParcel {
    let mut s = BTreeMap::new();
    s.insert("ndvi".to_string(), series());
    ReferenceParcel {
        series: s,
        boundaries: vec![
            (Stage::RE, 100, 130),
            (Stage::LD, 131, 170),
            (Stage::S, 171, 195),
            (Stage::F, 196, 246),
            (Stage::BD, 247, 275),
            (Stage::BO, 276, 315),
        ],
    }
}

fn query() -> BTreeMap<String, Vec<(u32, f64)>> {
    let mut q = BTreeMap::new();
    q.insert("ndvi".to_string(), series());
    q
}

#[test]
fn admissible_windows_overlap() {
    assert_eq!(admissible_stages(115), vec![Stage::RE]);
    assert_eq!(admissible_stages(135), vec![Stage::RE, Stage::LD]);
    assert_eq!(admissible_stages(208), vec![Stage::S, Stage::F]);
    assert_eq!(admissible_stages(225), vec![Stage::F, Stage::BD]);
    assert_eq!(admissible_stages(300), vec![Stage::BO]);
    assert!(admissible_stages(50).is_empty());
    assert!(admissible_stages(330).is_empty());
}

#[test]
fn self_match_lands_on_own_position() {
    // day 216 sits 40% through this parcel's flowering span of 50 days
    let refs = [reference()];
    let got =
        predict_continuous(&query(), &refs, 216, DEFAULT_TW, DEFAULT_SLOPE_STEP).unwrap();
    assert_eq!(got.stage(), Stage::F);
    let one_step = 100.0 * DEFAULT_SLOPE_STEP as f64 / 50.0;
    assert_abs_diff_eq!(got.value(), 440.0, epsilon = one_step + 1e-9);
}

#[test]
fn out_of_season_day_rejected() {
    let refs = [reference()];
    assert_eq!(
        predict_continuous(&query(), &refs, 50, DEFAULT_TW, DEFAULT_SLOPE_STEP).unwrap_err(),
        PhenoError::OutOfSeason(50)
    );
}

#[test]
fn prediction_stage_is_admissible() {
    let refs = [reference()];
    for dop in [190u32, 216, 233, 260, 300] {
        let got =
            predict_continuous(&query(), &refs, dop, DEFAULT_TW, DEFAULT_SLOPE_STEP).unwrap();
        let allowed = admissible_stages(dop);
        assert!(allowed.contains(&got.stage()), "day {dop} gave {:?}", got.stage());
        assert!((100.0..=700.0).contains(&got.value()));
    }
}

#[test]
fn short_reference_yields_no_window() {
    let mut short = reference();
    short
        .series
        .insert("ndvi".to_string(), (150..=200).step_by(5).map(|d| (d, curve(d))).collect());
    assert_eq!(
        predict_continuous(&query(), &[short], 240, DEFAULT_TW, DEFAULT_SLOPE_STEP).unwrap_err(),
        PhenoError::NoReferenceWindow(240)
    );
}

#[test]
fn reference_missing_feature_rejected() {
    let refs = [reference()];
    let mut q = query();
    q.insert("evi".to_string(), series());
    assert_eq!(
        predict_continuous(&q, &refs, 216, DEFAULT_TW, DEFAULT_SLOPE_STEP).unwrap_err(),
        PhenoError::MissingFeature("evi".to_string())
    );
}

fn informative_date(day: u32, n: usize, seed: u64) -> DatedSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let v = 150.0 + 500.0 * i as f64 / (n - 1) as f64 + rng.gen_range(-1.0..1.0);
        x.push(vec![v * 0.01, 700.0 - v]);
        labels.push(v);
    }
    DatedSamples {
        day,
        x,
        labels,
        feature_names: vec!["slope_a".to_string(), "slope_b".to_string()],
    }
}

#[test]
fn regressors_learn_informative_features() {
    let dated: Vec<DatedSamples> =
        [160u32, 200, 240].iter().map(|&d| informative_date(d, 80, d as u64)).collect();
    let reg = train_stage_regressors(&dated, 12, true).unwrap();
    assert_eq!(reg.models.len(), 3);
    assert!(reg.skipped.is_empty());
    for ((day, model), d) in reg.models.iter().zip(&dated) {
        assert_eq!(*day, d.day);
        let pred = ml_core::rf_predict_real(model, &d.x).unwrap();
        let mae = pred.iter().zip(&d.labels).map(|(p, y)| (p - y).abs()).sum::<f64>()
            / d.labels.len() as f64;
        assert!(mae < 15.0, "day {day} in-sample mae {mae}");
    }
    for &(_, err) in &reg.holdout_mae {
        assert!(err < 15.0, "holdout mae {err}");
    }
}

#[test]
fn small_dates_are_skipped() {
    let mut tiny = informative_date(140, 10, 1);
    tiny.day = 140;
    let dated = vec![tiny, informative_date(200, 60, 2)];
    let reg = train_stage_regressors(&dated, 5, false).unwrap();
    assert_eq!(reg.skipped, vec![(140, 10)]);
    assert_eq!(reg.models.len(), 1);
    assert_eq!(reg.models[0].0, 200);
}

#[test]
fn constant_labels_predict_constant() {
    let n = 60;
    let d = DatedSamples {
        day: 180,
        x: (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect(),
        labels: vec![400.0; n],
        feature_names: vec!["a".to_string(), "b".to_string()],
    };
    let reg = train_stage_regressors(&[d], 9, false).unwrap();
    let pred =
        ml_core::rf_predict_real(&reg.models[0].1, &[vec![12.0, 99.0]]).unwrap();
    assert_eq!(pred, vec![400.0]);
}

#[test]
fn regressor_training_is_deterministic_across_modes() {
    let dated: Vec<DatedSamples> =
        [160u32, 200].iter().map(|&d| informative_date(d, 60, d as u64)).collect();
    let a = train_stage_regressors(&dated, 12, true).unwrap();
    let b = train_stage_regressors(&dated, 12, false).unwrap();
    assert_eq!(a.holdout_mae, b.holdout_mae);
    for ((da, ma), (db, mb)) in a.models.iter().zip(&b.models) {
        assert_eq!(da, db);
        assert_eq!(ma, mb);
    }
}
