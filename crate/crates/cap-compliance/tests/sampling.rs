use std::collections::{BTreeMap, BTreeSet};

use cap_compliance::{
    persistence_threshold, season_filter, smart_sampling, traffic_light, Bands, CapError,
    ClassificationRun, CropInfo, CropTaxonomy, ParcelObservation, Season, TrafficLight,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn traffic_light_bands() {
    let b = Bands::default();
    assert_eq!(traffic_light(&[0.8, 0.1, 0.05, 0.05], &b).unwrap(), TrafficLight::Green);
    assert_eq!(traffic_light(&[0.5, 0.5], &b).unwrap(), TrafficLight::Unreliable);
    assert_eq!(traffic_light(&[0.45, 0.10], &b).unwrap(), TrafficLight::Yellow);
    assert_eq!(traffic_light(&[0.4, 0.2, 0.2], &b).unwrap(), TrafficLight::Red);
    assert_eq!(traffic_light(&[0.3, 0.2], &b).unwrap(), TrafficLight::Unreliable);
    // band edges are inclusive
    assert_eq!(traffic_light(&[0.75, 0.25], &b).unwrap(), TrafficLight::Green);
    assert_eq!(traffic_light(&[0.65, 0.35], &b).unwrap(), TrafficLight::Yellow);
    assert_eq!(traffic_light(&[0.45, 0.30], &b).unwrap(), TrafficLight::Red);
}

#[test]
fn traffic_light_rejects_bad_scores() {
    let b = Bands::default();
    assert_eq!(traffic_light(&[1.0], &b).unwrap_err(), CapError::InvalidScores);
    assert_eq!(traffic_light(&[], &b).unwrap_err(), CapError::InvalidScores);
    assert_eq!(traffic_light(&[0.9, -0.1], &b).unwrap_err(), CapError::InvalidScores);
    assert_eq!(traffic_light(&[0.9, f64::NAN], &b).unwrap_err(), CapError::InvalidScores);
}

#[test]
fn bands_are_configurable() {
    let strict = Bands::new(0.6, 0.3, 0.15).unwrap();
    let scores = [0.8, 0.25, 0.05];
    assert_eq!(traffic_light(&scores, &Bands::default()).unwrap(), TrafficLight::Green);
    assert_eq!(traffic_light(&scores, &strict).unwrap(), TrafficLight::Yellow);
    assert_eq!(Bands::new(0.5, 0.1, 0.3).unwrap_err(), CapError::InvalidBands);
    assert_eq!(Bands::new(0.5, 0.5, 0.1).unwrap_err(), CapError::InvalidBands);
    assert_eq!(Bands::new(0.5, 0.3, 0.0).unwrap_err(), CapError::InvalidBands);
}

#[test]
fn persistence_threshold_table() {
    let got: Vec<usize> =
        (1..=13).map(|n| persistence_threshold(n).unwrap()).collect();
    assert_eq!(got, vec![0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 5, 5]);
    assert_eq!(persistence_threshold(0).unwrap_err(), CapError::InvalidCount);
}

fn obs(declared: &str, predicted: &str, scores: &[f64]) -> ParcelObservation {
    ParcelObservation {
        declared: declared.to_string(),
        predicted: predicted.to_string(),
        scores: scores.to_vec(),
    }
}

fn run(day: u32, parcels: Vec<(i64, ParcelObservation)>) -> ClassificationRun {
    ClassificationRun { run_day: day, parcels: parcels.into_iter().collect() }
}

const GREEN: [f64; 3] = [0.9, 0.05, 0.05];
const MURKY: [f64; 3] = [0.4, 0.35, 0.25];

#[test]
fn single_green_mismatch_alarms() {
    let runs = vec![run(
        150,
        vec![(1, obs("maize", "barley", &GREEN)), (2, obs("maize", "maize", &GREEN))],
    )];
    let alarms = smart_sampling(&runs, &Bands::default()).unwrap();
    assert_eq!(alarms, BTreeSet::from([1]));
}

#[test]
fn two_of_six_runs_is_below_threshold() {
    // threshold at six runs is 3
    let mk = |mismatches: usize| -> Vec<ClassificationRun> {
        (0..6)
            .map(|i| {
                let crop = if i < mismatches { "barley" } else { "maize" };
                run(100 + i as u32 * 10, vec![(7, obs("maize", crop, &GREEN))])
            })
            .collect()
    };
    assert!(smart_sampling(&mk(2), &Bands::default()).unwrap().is_empty());
    assert_eq!(smart_sampling(&mk(3), &Bands::default()).unwrap(), BTreeSet::from([7]));
}

#[test]
fn non_green_mismatches_never_alarm() {
    let runs: Vec<ClassificationRun> =
        (0..4).map(|i| run(100 + i, vec![(3, obs("maize", "barley", &MURKY))])).collect();
    assert!(smart_sampling(&runs, &Bands::default()).unwrap().is_empty());
}

#[test]
fn missing_parcel_is_an_error() {
    let runs = vec![
        run(100, vec![(1, obs("maize", "maize", &GREEN)), (2, obs("maize", "maize", &GREEN))]),
        run(110, vec![(1, obs("maize", "maize", &GREEN))]),
    ];
    assert_eq!(
        smart_sampling(&runs, &Bands::default()).unwrap_err(),
        CapError::MissingParcel(2)
    );
    assert_eq!(smart_sampling(&[], &Bands::default()).unwrap_err(), CapError::InvalidCount);
}

fn random_runs(seed: u64) -> Vec<ClassificationRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..5)
        .map(|i| {
            let parcels = (0..200)
                .map(|id| {
                    let mut s = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                    let t: f64 = s.iter().sum();
                    s.iter_mut().for_each(|x| *x /= t);
                    let crop = if rng.gen_bool(0.3) { "barley" } else { "maize" };
                    (id, obs("maize", crop, &s))
                })
                .collect();
            run(100 + i * 16, parcels)
        })
        .collect()
}

#[test]
fn raising_green_threshold_never_adds_alarms() {
    for seed in 0..10 {
        let runs = random_runs(seed);
        let loose = smart_sampling(&runs, &Bands::default()).unwrap();
        let tight = smart_sampling(&runs, &Bands::new(0.65, 0.3, 0.15).unwrap()).unwrap();
        assert!(tight.is_subset(&loose), "seed {seed}");
    }
}

#[test]
fn run_day_labels_do_not_matter() {
    let runs = random_runs(3);
    let relabeled: Vec<ClassificationRun> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| ClassificationRun { run_day: 200 + i as u32, parcels: r.parcels.clone() })
        .collect();
    assert_eq!(
        smart_sampling(&runs, &Bands::default()).unwrap(),
        smart_sampling(&relabeled, &Bands::default()).unwrap()
    );
}

fn taxonomy() -> CropTaxonomy {
    let mut crops = BTreeMap::new();
    let mut add = |code: &str, season: Season| {
        crops.insert(
            code.to_string(),
            CropInfo {
                type_name: code.to_string(),
                family: "grass".to_string(),
                season,
            },
        );
    };
    add("maize", Season::Summer);
    add("barley", Season::Winter);
    add("wheat", Season::Winter);
    add("ryegrass", Season::YearRound);
    CropTaxonomy { crops }
}

#[test]
fn season_filter_keeps_cross_season_confusions() {
    let latest = run(
        220,
        vec![
            (1, obs("maize", "barley", &GREEN)),
            (2, obs("wheat", "barley", &GREEN)),
            (3, obs("barley", "ryegrass", &GREEN)),
        ],
    );
    let alarms = BTreeSet::from([1, 2, 3]);
    let kept = season_filter(&alarms, &latest, &taxonomy()).unwrap();
    assert_eq!(kept, BTreeSet::from([1, 3]));
}

#[test]
fn season_filter_needs_known_crops_and_parcels() {
    let latest = run(220, vec![(1, obs("maize", "quinoa", &GREEN))]);
    assert_eq!(
        season_filter(&BTreeSet::from([1]), &latest, &taxonomy()).unwrap_err(),
        CapError::UnknownCrop("quinoa".to_string())
    );
    assert_eq!(
        season_filter(&BTreeSet::from([9]), &latest, &taxonomy()).unwrap_err(),
        CapError::MissingParcel(9)
    );
}

#[test]
fn summer_declaration_winter_prediction_alarms_end_to_end() {
    let runs = vec![run(180, vec![(11, obs("maize", "barley", &GREEN))])];
    let alarms = smart_sampling(&runs, &Bands::default()).unwrap();
    let refined = season_filter(&alarms, runs.last().unwrap(), &taxonomy()).unwrap();
    assert_eq!(refined, BTreeSet::from([11]));
}
