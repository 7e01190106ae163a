use approx::assert_abs_diff_eq;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rice_pipeline::{
    binary_f1, evaluate_k, identify_rice_cluster, land_water_split, rice_map, select_best_k,
    sweep_k, ClusterCandidate, RiceError, RiceReferenceSignature,
};

const T: usize = 10;

fn ndvi_names() -> Vec<String> {
    (0..T).map(|t| format!("ndvi_{t}")).collect()
}

fn jitter(rng: &mut ChaCha8Rng, base: &[f64; T], amp: f64) -> Vec<f64> {
    base.iter().map(|v| (v + rng.gen_range(-amp..amp)).clamp(0.0, 1.0)).collect()
}

const WATER: [f64; T] = [0.05, 0.04, 0.06, 0.05, 0.05, 0.04, 0.06, 0.05, 0.04, 0.05];
// flooding dip early, steep rise to a high plateau, then drawdown
const RICE: [f64; T] = [0.18, 0.08, 0.10, 0.30, 0.55, 0.75, 0.85, 0.80, 0.65, 0.45];
const DRY_CROP: [f64; T] = [0.30, 0.38, 0.50, 0.65, 0.70, 0.62, 0.50, 0.38, 0.30, 0.25];
const FOREST: [f64; T] = [0.72, 0.74, 0.75, 0.76, 0.77, 0.78, 0.77, 0.76, 0.74, 0.72];
const BARE: [f64; T] = [0.18, 0.19, 0.20, 0.21, 0.20, 0.19, 0.18, 0.20, 0.19, 0.18];

struct Scene {
    x: Vec<Vec<f64>>,
    rice: Vec<bool>,
}

fn scene(n_per_class: usize, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut rice = Vec::new();
    for (base, is_rice) in [
        (&WATER, false),
        (&RICE, true),
        (&DRY_CROP, false),
        (&FOREST, false),
        (&BARE, false),
    ] {
        for _ in 0..n_per_class {
            x.push(jitter(&mut rng, base, 0.04));
            rice.push(is_rice);
        }
    }
    // shuffle so class blocks cannot leak into cluster indices
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.shuffle(&mut rng);
    Scene {
        x: order.iter().map(|&i| x[i].clone()).collect(),
        rice: order.iter().map(|&i| rice[i]).collect(),
    }
}

#[test]
fn water_split_matches_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let crop = [0.68, 0.70, 0.72, 0.71, 0.69, 0.70, 0.73, 0.72, 0.70, 0.69];
    let mut x = Vec::new();
    let mut is_water = Vec::new();
    for i in 0..400 {
        let water = i % 2 == 0;
        x.push(jitter(&mut rng, if water { &WATER } else { &crop }, 0.04));
        is_water.push(water);
    }
    let mask = land_water_split(&x, &ndvi_names(), 5).unwrap();
    let agree = mask
        .iter()
        .zip(&is_water)
        .filter(|(&land, &water)| land == !water)
        .count();
    assert!(agree as f64 / mask.len() as f64 >= 0.99, "agreement {agree}/{}", mask.len());
}

#[test]
fn all_land_input_stays_land() {
    let x = vec![vec![0.7; T]; 12];
    let mask = land_water_split(&x, &ndvi_names(), 3).unwrap();
    assert!(mask.iter().all(|&m| m));
}

#[test]
fn missing_ndvi_rejected() {
    let names: Vec<String> = (0..T).map(|t| format!("b04_{t}")).collect();
    let x = vec![vec![0.5; T]; 4];
    assert_eq!(
        land_water_split(&x, &names, 1).unwrap_err(),
        RiceError::MissingFeature("ndvi")
    );
}

#[test]
fn land_water_partition_is_exhaustive() {
    let sc = scene(30, 17);
    let mask = land_water_split(&sc.x, &ndvi_names(), 9).unwrap();
    assert_eq!(mask.len(), sc.x.len());
    let land = mask.iter().filter(|&&m| m).count();
    let water = mask.iter().filter(|&&m| !m).count();
    assert_eq!(land + water, sc.x.len());
}

#[test]
fn rice_cluster_exact_match_wins() {
    let reference = RiceReferenceSignature { values: RICE.to_vec() };
    let centroids = vec![WATER.to_vec(), RICE.to_vec(), FOREST.to_vec()];
    assert_eq!(identify_rice_cluster(&centroids, &reference), 1);
}

#[test]
fn rice_cluster_argmin_against_oracle() {
    let reference = RiceReferenceSignature { values: RICE.to_vec() };
    let centroids = vec![DRY_CROP.to_vec(), BARE.to_vec(), FOREST.to_vec()];
    let mse: Vec<f64> = centroids
        .iter()
        .map(|c| {
            c.iter().zip(&reference.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                / c.len() as f64
        })
        .collect();
    let expect = mse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(identify_rice_cluster(&centroids, &reference), expect);
}

#[test]
fn rice_cluster_tie_breaks_low() {
    let reference = RiceReferenceSignature { values: vec![0.0, 0.0] };
    let centroids = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]];
    assert_eq!(identify_rice_cluster(&centroids, &reference), 0);
}

fn cand(k: usize, p: f64, r: f64, f: f64) -> ClusterCandidate {
    ClusterCandidate { k, rice_cluster_index: 0, precision: p, recall: r, f1: f }
}

#[test]
fn best_k_picks_highest_f1() {
    let cands = vec![cand(6, 0.92, 0.88, 0.899), cand(7, 0.97, 0.916, 0.943)];
    assert_eq!(select_best_k(&cands).unwrap().k, 7);
}

#[test]
fn best_k_requires_both_bars() {
    let low_recall = vec![cand(5, 0.95, 0.85, 0.897), cand(8, 0.99, 0.80, 0.885)];
    assert_eq!(select_best_k(&low_recall).unwrap_err(), RiceError::NoQualifyingClustering);
    let low_precision = vec![cand(5, 0.90, 0.95, 0.924)];
    assert_eq!(select_best_k(&low_precision).unwrap_err(), RiceError::NoQualifyingClustering);
}

#[test]
fn best_k_tie_takes_smallest_k() {
    let cands = vec![cand(9, 0.95, 0.95, 0.95), cand(6, 0.95, 0.95, 0.95)];
    assert_eq!(select_best_k(&cands).unwrap().k, 6);
}

#[test]
fn best_k_permutation_invariant() {
    let mut cands = vec![
        cand(5, 0.91, 0.86, 0.884),
        cand(6, 0.95, 0.95, 0.95),
        cand(9, 0.95, 0.95, 0.95),
        cand(12, 0.99, 0.87, 0.926),
    ];
    let forward = select_best_k(&cands).unwrap();
    cands.reverse();
    assert_eq!(select_best_k(&cands).unwrap(), forward);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        cands.shuffle(&mut rng);
        assert_eq!(select_best_k(&cands).unwrap(), forward);
    }
}

#[test]
fn area_is_count_times_pixel_area() {
    // separable toy scene: rice rows sit at 1.0, others at 0.0
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for i in 0..1500 {
        let is_rice = i < 1000;
        x.push(vec![if is_rice { 1.0 } else { 0.0 }, (i % 13) as f64 * 0.01]);
        labels.push(usize::from(is_rice));
    }
    let names = vec!["ndvi_a".to_string(), "ndvi_b".to_string()];
    let map = rice_map(&x, &names, &labels, None, 10, 6, 0.01, 9, false).unwrap();
    assert_eq!(map.labels, labels);
    assert_abs_diff_eq!(map.total_area_ha, 10.0, epsilon = 1e-12);
}

#[test]
fn perfect_pseudo_labels_keep_perfect_f1() {
    let sc = scene(60, 23);
    let truth: Vec<usize> = sc.rice.iter().map(|&r| usize::from(r)).collect();
    let map =
        rice_map(&sc.x, &ndvi_names(), &truth, Some(&truth), 25, 12, 0.01, 31, false).unwrap();
    let rf_f1 = binary_f1(&truth, &map.labels);
    assert!(rf_f1 >= binary_f1(&truth, &truth), "rf f1 {rf_f1}");
    let m = map.metrics.unwrap();
    assert_eq!(m.overall_accuracy, 1.0);
}

#[test]
fn noisy_pipeline_end_to_end() {
    let sc = scene(400, 47);
    let seed = 97u64;
    let land = land_water_split(&sc.x, &ndvi_names(), seed).unwrap();
    let land_idx: Vec<usize> = (0..sc.x.len()).filter(|&i| land[i]).collect();
    let x_land: Vec<Vec<f64>> = land_idx.iter().map(|&i| sc.x[i].clone()).collect();
    let truth_land: Vec<usize> =
        land_idx.iter().map(|&i| usize::from(sc.rice[i])).collect();

    // 5% labeled subset with a few flipped labels
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut labeled: Vec<(usize, bool)> = Vec::new();
    for (row, &t) in truth_land.iter().enumerate() {
        if rng.gen::<f64>() < 0.05 {
            let flip = rng.gen::<f64>() < 0.05;
            labeled.push((row, (t == 1) != flip));
        }
    }
    let reference = RiceReferenceSignature::from_labeled(&x_land, &labeled).unwrap();
    let ks: Vec<usize> = (4..=10).collect();
    let cands = sweep_k(&x_land, &reference, &labeled, &ks, seed, false).unwrap();
    let best = select_best_k(&cands).unwrap();
    assert!(best.precision > 0.90 && best.recall > 0.85);

    let (_, pseudo) =
        evaluate_k(&x_land, &reference, &labeled, best.k, rice_pipeline::k_seed(seed, best.k))
            .unwrap();
    let pseudo_f1 = binary_f1(&truth_land, &pseudo);

    let map = rice_map(&x_land, &ndvi_names(), &pseudo, Some(&truth_land), 25, 12, 0.01, seed, true)
        .unwrap();
    let rf_f1 = binary_f1(&truth_land, &map.labels);
    assert!(
        rf_f1 >= pseudo_f1 - 0.02,
        "rf f1 {rf_f1} fell more than 0.02 below pseudo f1 {pseudo_f1}"
    );

    // identical reruns produce identical maps
    let again =
        rice_map(&x_land, &ndvi_names(), &pseudo, Some(&truth_land), 25, 12, 0.01, seed, false)
            .unwrap();
    assert_eq!(map.labels, again.labels);
}

#[test]
fn sweep_parallel_matches_serial() {
    let sc = scene(60, 5);
    let labeled: Vec<(usize, bool)> =
        sc.rice.iter().enumerate().step_by(7).map(|(i, &t)| (i, t)).collect();
    let reference = RiceReferenceSignature::from_labeled(&sc.x, &labeled).unwrap();
    let ks = vec![3, 4, 5, 6];
    let seq = sweep_k(&sc.x, &reference, &labeled, &ks, 13, false).unwrap();
    let par = sweep_k(&sc.x, &reference, &labeled, &ks, 13, true).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn empty_reference_rejected() {
    let x = vec![vec![0.1, 0.2]];
    assert_eq!(
        RiceReferenceSignature::from_labeled(&x, &[(0, false)]).unwrap_err(),
        RiceError::NoReference
    );
}
