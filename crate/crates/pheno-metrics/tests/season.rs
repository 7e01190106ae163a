use pheno_metrics::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sits::FixedStepSeries;

fn fs(start: u32, step: u32, values: Vec<f64>) -> FixedStepSeries {
    let days = (0..values.len() as u32).map(|i| start + i * step).collect();
    FixedStepSeries::new(days, values)
}

#[test]
fn despike_leaves_clean_series() {
    let clean = fs(100, 10, vec![0.1, 0.3, 0.5, 0.6, 0.5, 0.3, 0.1]);
    assert_eq!(despike_median(&clean, DEFAULT_DESPIKE_PASSES, DEFAULT_DESPIKE_Z), clean);
}

#[test]
fn despike_removes_single_spike() {
    let mut values = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    values[3] = 9.0;
    let spiked = fs(100, 10, values);
    let out = despike_median(&spiked, 3, 2.0);
    // median(0.3, 9.0, 0.5) = 0.5
    assert_eq!(out.values[3], 0.5, "spike replaced by local median");
    for (i, &v) in out.values.iter().enumerate() {
        if i != 3 {
            assert_eq!(v, spiked.values[i]);
        }
    }
}

#[test]
fn despike_reaches_fixed_point() {
    let spiked = fs(100, 10, vec![0.1, 5.0, 0.3, 0.4, -4.0, 0.6, 0.7]);
    let once = despike_median(&spiked, 6, 2.0);
    let again = despike_median(&once, 1, 2.0);
    assert_eq!(once, again);
}

#[test]
fn sg_reproduces_quadratic_exactly() {
    let days: Vec<u32> = (0..11).map(|i| 100 + i * 10).collect();
    let values: Vec<f64> = days.iter().map(|&d| {
        let t = (d as f64 - 150.0) / 50.0;
        0.2 + 0.5 * t - 0.3 * t * t
    }).collect();
    let series = FixedStepSeries::new(days, values.clone());
    let out = savitzky_golay(&series, 7, 2).unwrap();
    for (got, want) in out.values.iter().zip(&values) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn sg_constant_fixed_point() {
    let series = fs(1, 1, vec![0.4; 15]);
    let out = savitzky_golay(&series, 5, 2).unwrap();
    for v in out.values {
        assert!((v - 0.4).abs() < 1e-12);
    }
}

#[test]
fn sg_denoises_sine() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let days: Vec<u32> = (0..40).map(|i| i * 5).collect();
    let clean: Vec<f64> = days.iter().map(|&d| (d as f64 / 60.0).sin()).collect();
    let noisy: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
    let smoothed = savitzky_golay(&FixedStepSeries::new(days, noisy.clone()), 7, 2).unwrap();
    let rmse = |xs: &[f64]| {
        (xs.iter().zip(&clean).map(|(x, c)| (x - c) * (x - c)).sum::<f64>() / clean.len() as f64)
            .sqrt()
    };
    assert!(rmse(&smoothed.values) < rmse(&noisy));
}

#[test]
fn sg_rejects_bad_params() {
    let series = fs(1, 1, vec![0.0; 9]);
    assert_eq!(savitzky_golay(&series, 4, 2), Err(PhenoError::InvalidParams));
    assert_eq!(savitzky_golay(&series, 5, 5), Err(PhenoError::InvalidParams));
}

#[test]
fn sos_interpolates_crossing() {
    let ndvi = fs(100, 10, vec![0.1, 0.3, 0.5, 0.7, 0.9, 0.6]);
    let ndwi = fs(100, 10, vec![0.5, 0.35, 0.2, 0.05, -0.1, -0.1]);
    // d = ndwi - ndvi = [0.4, 0.05, -0.3, ...]; crossing inside (110, 120)
    let sos = detect_sos(&ndvi, &ndwi).unwrap();
    let want = 110.0 + 0.05 / 0.35 * 10.0;
    assert!((sos - want).abs() < 1e-12);
}

#[test]
fn sos_on_anchor_returns_anchor() {
    let ndvi = fs(100, 10, vec![0.2, 0.4, 0.6, 0.8]);
    let ndwi = fs(100, 10, vec![0.5, 0.4, 0.1, 0.0]);
    // d = [0.3, 0.0, ...]: crossing lands exactly on day 110
    assert_eq!(detect_sos(&ndvi, &ndwi).unwrap(), 110.0);
}

#[test]
fn sos_takes_latest_crossing_before_peak() {
    let ndvi = fs(100, 10, vec![0.2, 0.3, 0.2, 0.3, 0.8, 0.9, 0.5]);
    let ndwi = fs(100, 10, vec![0.5, 0.2, 0.4, 0.2, 0.1, 0.0, 0.0]);
    // d crosses at (100,110) and again at (120,130); the later one wins
    let sos = detect_sos(&ndvi, &ndwi).unwrap();
    assert!(sos > 120.0 && sos <= 130.0, "got {sos}");
}

#[test]
fn sos_requires_a_crossing() {
    let ndvi = fs(100, 10, vec![0.2, 0.5, 0.8, 0.6]);
    let ndwi = fs(100, 10, vec![0.1, 0.1, 0.1, 0.1]);
    assert_eq!(detect_sos(&ndvi, &ndwi), Err(PhenoError::NoSeasonStart));
    let flat = fs(100, 10, vec![0.4; 4]);
    assert_eq!(detect_sos(&flat, &ndwi), Err(PhenoError::NoSeasonStart));
}

#[test]
fn sos_rejects_mismatched_anchors() {
    let a = fs(100, 10, vec![0.1, 0.2, 0.3]);
    let b = fs(105, 10, vec![0.3, 0.2, 0.1]);
    assert_eq!(detect_sos(&a, &b), Err(PhenoError::MismatchedAnchors));
}

#[test]
fn eos_first_psri_crossing_after_peak() {
    let ndvi = fs(100, 10, vec![0.2, 0.6, 0.9, 0.7, 0.5, 0.3]);
    let psri = fs(100, 10, vec![0.0, 0.0, 0.1, 0.3, 0.6, 0.7]);
    // e = psri - ndvi turns non-negative between 130 and 140
    let eos = detect_eos(&ndvi, &psri).unwrap();
    let e0: f64 = 0.3 - 0.7;
    let e1: f64 = 0.6 - 0.5;
    let want = 130.0 + e0.abs() / (e1 - e0) * 10.0;
    assert!((eos - want).abs() < 1e-12);
}

#[test]
fn eos_falls_back_to_amplitude_threshold() {
    let ndvi = fs(100, 10, vec![0.1, 0.5, 0.9, 0.6, 0.3, 0.1]);
    let psri = fs(100, 10, vec![0.0; 6]);
    // psri never meets ndvi; base = 0.1, threshold = 0.18
    let eos = detect_eos(&ndvi, &psri).unwrap();
    assert!(eos > 130.0 && eos < 150.0, "got {eos}");
    let no_drop = fs(100, 10, vec![0.1, 0.5, 0.9, 0.9, 0.9, 0.9]);
    assert_eq!(detect_eos(&no_drop, &psri), Err(PhenoError::NoSeasonEnd));
}

fn symmetric_triangle() -> (FixedStepSeries, FixedStepSeries, FixedStepSeries) {
    let ndvi = fs(100, 10, vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0]);
    let ndwi = fs(100, 10, vec![0.5, 0.25, -0.5, -0.75, -1.0, -1.0, -1.0, -1.0, -1.0]);
    let psri = fs(100, 10, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.25, 0.4, 0.25, 0.2]);
    (ndvi, ndwi, psri)
}

#[test]
fn symmetric_triangle_splits_evenly() {
    let (ndvi, ndwi, psri) = symmetric_triangle();
    let m = extract_season(&ndvi, &ndwi, &psri).unwrap();
    assert_eq!(m.sos, 110.0);
    assert_eq!(m.pos, 140.0);
    assert_eq!(m.eos, 170.0);
    assert_eq!(m.base_level, 0.0);
    assert_eq!(m.biomass_indicator, m.yield_indicator, "symmetric season");
    assert_eq!(m.biomass_indicator + m.yield_indicator, m.small_integral);
    assert_eq!(m.small_integral, 37.5);
    assert_eq!(m.large_integral, 37.5);
    assert!((m.rate_inc - 0.025).abs() < 1e-12);
    assert!((m.rate_dec - 0.025).abs() < 1e-12);
}

#[test]
fn peak_is_argmax_inside_season() {
    let (ndvi, ndwi, psri) = symmetric_triangle();
    let m = extract_season(&ndvi, &ndwi, &psri).unwrap();
    let peak_value = ndvi
        .anchor_days
        .iter()
        .zip(&ndvi.values)
        .filter(|&(&d, _)| (d as f64) >= m.sos && (d as f64) <= m.eos)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let at_pos = ndvi.values[ndvi.anchor_days.iter().position(|&d| d as f64 == m.pos).unwrap()];
    assert_eq!(at_pos, peak_value);
}

#[test]
fn scaling_series_scales_integrals_only() {
    let (ndvi, ndwi, psri) = symmetric_triangle();
    let c = 2.0;
    let scale = |s: &FixedStepSeries| {
        FixedStepSeries::new(s.anchor_days.clone(), s.values.iter().map(|v| v * c).collect())
    };
    let base = extract_season(&ndvi, &ndwi, &psri).unwrap();
    let scaled = extract_season(&scale(&ndvi), &scale(&ndwi), &scale(&psri)).unwrap();
    assert_eq!(scaled.sos, base.sos);
    assert_eq!(scaled.pos, base.pos);
    assert_eq!(scaled.eos, base.eos);
    assert!((scaled.large_integral - c * base.large_integral).abs() < 1e-12);
    assert!((scaled.small_integral - c * base.small_integral).abs() < 1e-12);
    assert!((scaled.rate_inc - c * base.rate_inc).abs() < 1e-12);
}

#[test]
fn small_never_exceeds_large_on_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let n = 12;
        let peak = rng.gen_range(4..8);
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let d = (i as f64 - peak as f64).abs();
                (1.0 - d / peak as f64).max(0.05) + rng.gen_range(0.0..0.02)
            })
            .collect();
        let ndvi = fs(100, 10, values);
        let ndwi = FixedStepSeries::new(
            ndvi.anchor_days.clone(),
            ndvi.values.iter().enumerate().map(|(i, v)| if i < 2 { v + 0.3 } else { v - 0.5 }).collect(),
        );
        let psri = FixedStepSeries::new(
            ndvi.anchor_days.clone(),
            ndvi.values.iter().enumerate().map(|(i, v)| if i > n - 3 { v + 0.3 } else { v - 0.5 }).collect(),
        );
        let m = extract_season(&ndvi, &ndwi, &psri).unwrap();
        assert!(m.small_integral <= m.large_integral + 1e-12);
        assert!(m.small_integral >= 0.0);
        assert!(m.sos < m.pos && m.pos < m.eos);
    }
}
