use indices::*;

fn sample(pairs: &[(&str, f64)]) -> SpectralSample {
    pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
}

fn full_sample() -> SpectralSample {
    sample(&[
        ("B02", 0.05),
        ("B03", 0.3),
        ("B04", 0.1),
        ("B06", 0.25),
        ("B08", 0.5),
        ("B11", 0.25),
        ("B12", 0.2),
    ])
}

#[test]
fn spot_values_exact() {
    let s = full_sample();
    let get = |name: &str| compute_index(name, &s).unwrap().unwrap();
    assert!((get("ndvi") - 2.0 / 3.0).abs() < 1e-12);
    assert!((get("savi") - 0.555_642_023_346_303_5).abs() < 1e-12);
    assert!((get("evi") - 0.579_710_144_927_536_3).abs() < 1e-12);
    assert!((get("ndwi") - (-0.25)).abs() < 1e-12);
    assert!((get("ndmi") - 1.0 / 3.0).abs() < 1e-12);
    assert!((get("psri") - 0.2).abs() < 1e-12);
    assert!((get("sipi") - 1.125).abs() < 1e-12);
    assert!((get("wdrvi") - 0.0).abs() < 1e-12);
    assert!((get("gvmi") - 0.38 / 0.82).abs() < 1e-12);
    assert!((get("gi") - 3.0).abs() < 1e-12);
    assert!((get("gcvi") - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn gari_and_vari_hand_values() {
    let s = sample(&[("B08", 0.5), ("B03", 0.3), ("B02", 0.2), ("B04", 0.1)]);
    // inner term B02-B04 = 0.1; (0.5-0.2)/(0.5-0.4)
    assert!((compute_index("gari", &s).unwrap().unwrap() - 3.0).abs() < 1e-12);
    assert!((compute_index("varigreen", &s).unwrap().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn equal_bands_zero_ndvi() {
    let s = sample(&[("B08", 0.3), ("B04", 0.3)]);
    assert_eq!(compute_index("ndvi", &s).unwrap(), Some(0.0));
}

#[test]
fn ndvi_antisymmetric() {
    let a = sample(&[("B08", 0.5), ("B04", 0.2)]);
    let b = sample(&[("B08", 0.2), ("B04", 0.5)]);
    let va = compute_index("ndvi", &a).unwrap().unwrap();
    let vb = compute_index("ndvi", &b).unwrap().unwrap();
    assert!((va + vb).abs() < 1e-12);
}

#[test]
fn normalized_difference_bounded() {
    for i in 0..50 {
        let b08 = 0.01 + (i as f64) * 0.017;
        let b04 = 1.0 - (i as f64) * 0.013;
        let s = sample(&[("B08", b08), ("B04", b04), ("B03", b04), ("B11", b08), ("B12", b04)]);
        for name in ["ndvi", "ndwi", "ndmi", "gvmi"] {
            let v = compute_index(name, &s).unwrap().unwrap();
            assert!((-1.0..=1.0).contains(&v), "{name} out of range: {v}");
        }
    }
}

#[test]
fn zero_denominator_is_null_not_infinite() {
    let s = sample(&[("B08", 0.0), ("B04", 0.0), ("B02", 0.0), ("B03", 0.0), ("B06", 0.0)]);
    assert_eq!(compute_index("ndvi", &s).unwrap(), None);
    assert_eq!(compute_index("psri", &s).unwrap(), None);
    assert_eq!(compute_index("gi", &s).unwrap(), None);
    // SIPI with B08 == B04
    let t = sample(&[("B08", 0.4), ("B04", 0.4), ("B02", 0.1)]);
    assert_eq!(compute_index("sipi", &t).unwrap(), None);
}

#[test]
fn missing_band_and_unknown_index() {
    let s = sample(&[("B08", 0.5)]);
    assert_eq!(compute_index("ndvi", &s), Err(IndexError::MissingBand("B04")));
    assert!(matches!(compute_index("bori", &s), Err(IndexError::UnknownIndex(_))));
}

#[test]
fn names_case_insensitive_and_cataloged() {
    let s = full_sample();
    for name in INDEX_NAMES {
        let lower = compute_index(name, &s).unwrap();
        let upper = compute_index(&name.to_uppercase(), &s).unwrap();
        assert_eq!(lower, upper, "{name}");
    }
}

#[test]
fn gdd_values() {
    assert!((gdd(30.0, 20.0, DEFAULT_T_BASE).unwrap() - 9.4).abs() < 1e-12);
    assert_eq!(gdd(16.0, 10.0, DEFAULT_T_BASE).unwrap(), 0.0);
    assert_eq!(gdd(15.6, 15.6, DEFAULT_T_BASE).unwrap(), 0.0);
    assert_eq!(gdd(10.0, 20.0, DEFAULT_T_BASE), Err(IndexError::InvalidTemps));
}

#[test]
fn gdd_monotone() {
    let base = gdd(25.0, 15.0, DEFAULT_T_BASE).unwrap();
    assert!(gdd(26.0, 15.0, DEFAULT_T_BASE).unwrap() >= base);
    assert!(gdd(25.0, 16.0, DEFAULT_T_BASE).unwrap() >= base);
    assert!(base >= 0.0);
}

#[test]
fn weather_csv_parses() {
    let text = "day,tmin,tmax,precip,radiation,soil_t,soil_m,rh,wind\n120,12.5,27.0,0.0,210.0,15.0,0.3,55.0,2.1\n121,13.0,24.0,4.2,180.0,15.2,0.33,60.0,3.0\n";
    let rows = read_weather_csv(text).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].day, 120);
    assert_eq!(rows[1].precip, 4.2);
    let bad = "day,tmin,tmax,precip,radiation,soil_t,soil_m,rh,wind\n120,30.0,20.0,0,0,0,0,0,0\n";
    assert!(read_weather_csv(bad).is_err());
    let missing = "day,tmin\n120,12.5\n";
    assert!(matches!(read_weather_csv(missing), Err(IndexError::Parse(_))));
}
