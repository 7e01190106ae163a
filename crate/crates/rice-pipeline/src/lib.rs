//! Weakly supervised paddy-rice mapping: split water off with a coarse
//! clustering, pseudo-label the land pixels by matching cluster centroids to
//! a small labeled reference, pick the cluster count that scores best, then
//! train a forest on the pseudo-labels and map everything.

use ml_core::{
    classification_metrics, kmeans_fit, rf_fit, rf_predict_class, splitmix64, ClassMetrics,
    ConfusionMatrix, Dataset, Labels, MlError,
};

pub const DEFAULT_K_RANGE: (usize, usize) = (5, 15);
pub const DEFAULT_PIXEL_AREA_HA: f64 = 0.01;
pub const MIN_RECALL: f64 = 0.85;
pub const MIN_PRECISION: f64 = 0.90;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RiceError {
    #[error("feature {0:?} not present")]
    MissingFeature(&'static str),
    #[error("no clustering met the precision/recall bar")]
    NoQualifyingClustering,
    #[error("labeled subset is empty")]
    NoReference,
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// Mean time series of the known rice samples, on the clustering feature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RiceReferenceSignature {
    pub values: Vec<f64>,
}

impl RiceReferenceSignature {
    /// Column means over the rows flagged rice in `labeled`.
    pub fn from_labeled(
        x: &[Vec<f64>],
        labeled: &[(usize, bool)],
    ) -> Result<RiceReferenceSignature, RiceError> {
        let rice: Vec<usize> =
            labeled.iter().filter(|(_, is_rice)| *is_rice).map(|&(i, _)| i).collect();
        if rice.is_empty() {
            return Err(RiceError::NoReference);
        }
        let d = x[0].len();
        let mut values = vec![0.0; d];
        for &i in &rice {
            for (acc, v) in values.iter_mut().zip(&x[i]) {
                *acc += v;
            }
        }
        for v in &mut values {
            *v /= rice.len() as f64;
        }
        Ok(RiceReferenceSignature { values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterCandidate {
    pub k: usize,
    pub rice_cluster_index: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// k=2 clustering; the cluster whose centroid averages lower over the NDVI
/// columns is water. Returns the land mask (true = land).
pub fn land_water_split(
    x: &[Vec<f64>],
    feature_names: &[String],
    seed: u64,
) -> Result<Vec<bool>, RiceError> {
    let ndvi_cols: Vec<usize> = feature_names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.to_ascii_lowercase().contains("ndvi"))
        .map(|(i, _)| i)
        .collect();
    if ndvi_cols.is_empty() {
        return Err(RiceError::MissingFeature("ndvi"));
    }
    let (model, assign) = kmeans_fit(x, 2.min(x.len()), seed, 300, 1e-6)?;
    // a collapsed second cluster means there is nothing to call water
    if model.centroids.len() < 2 || assign.iter().all(|&a| a == assign[0]) {
        return Ok(vec![true; x.len()]);
    }
    let ndvi_mean = |c: &[f64]| -> f64 {
        ndvi_cols.iter().map(|&i| c[i]).sum::<f64>() / ndvi_cols.len() as f64
    };
    let water = if ndvi_mean(&model.centroids[0]) <= ndvi_mean(&model.centroids[1]) { 0 } else { 1 };
    Ok(assign.iter().map(|&a| a != water).collect())
}

/// Index of the centroid with the smallest mean squared error to the
/// reference signature; ties go to the lowest index.
pub fn identify_rice_cluster(centroids: &[Vec<f64>], reference: &RiceReferenceSignature) -> usize {
    assert!(!centroids.is_empty());
    let mse = |c: &[f64]| -> f64 {
        c.iter().zip(&reference.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            / c.len() as f64
    };
    let mut best = 0;
    let mut best_mse = mse(&centroids[0]);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let m = mse(c);
        if m < best_mse {
            best = i;
            best_mse = m;
        }
    }
    best
}

/// Cluster at one k, call the cluster nearest the reference "rice", and score
/// the induced pseudo-labels against the labeled subset. Also returns the
/// pseudo-label vector (1 = rice).
pub fn evaluate_k(
    x: &[Vec<f64>],
    reference: &RiceReferenceSignature,
    labeled: &[(usize, bool)],
    k: usize,
    seed: u64,
) -> Result<(ClusterCandidate, Vec<usize>), RiceError> {
    let (model, assign) = kmeans_fit(x, k, seed, 300, 1e-6)?;
    let rice_cluster_index = identify_rice_cluster(&model.centroids, reference);
    let pseudo: Vec<usize> =
        assign.iter().map(|&a| usize::from(a == rice_cluster_index)).collect();
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for &(i, is_rice) in labeled {
        match (pseudo[i] == 1, is_rice) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok((ClusterCandidate { k, rice_cluster_index, precision, recall, f1 }, pseudo))
}

/// Seed for the clustering at one k, independent of every other k.
pub fn k_seed(seed: u64, k: usize) -> u64 {
    splitmix64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Evaluate every k in `ks`; each k clusters under its own derived seed, so
/// the sweep order (and parallel scheduling) cannot change any result.
pub fn sweep_k(
    x: &[Vec<f64>],
    reference: &RiceReferenceSignature,
    labeled: &[(usize, bool)],
    ks: &[usize],
    seed: u64,
    parallel: bool,
) -> Result<Vec<ClusterCandidate>, RiceError> {
    let run = |&k: &usize| -> Result<ClusterCandidate, RiceError> {
        evaluate_k(x, reference, labeled, k, k_seed(seed, k)).map(|(c, _)| c)
    };
    run_sweep(ks, parallel, run)
}

#[cfg(feature = "parallel")]
fn run_sweep<F>(ks: &[usize], parallel: bool, run: F) -> Result<Vec<ClusterCandidate>, RiceError>
where
    F: Fn(&usize) -> Result<ClusterCandidate, RiceError> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        ks.par_iter().map(run).collect()
    } else {
        ks.iter().map(run).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_sweep<F>(ks: &[usize], _parallel: bool, run: F) -> Result<Vec<ClusterCandidate>, RiceError>
where
    F: Fn(&usize) -> Result<ClusterCandidate, RiceError>,
{
    ks.iter().map(run).collect()
}

/// Keep candidates with recall above 0.85 and precision above 0.90 (both
/// strict), then the highest F1; equal F1 falls back to the smallest k.
pub fn select_best_k(candidates: &[ClusterCandidate]) -> Result<ClusterCandidate, RiceError> {
    candidates
        .iter()
        .filter(|c| c.recall > MIN_RECALL && c.precision > MIN_PRECISION)
        .copied()
        .fold(None::<ClusterCandidate>, |best, c| match best {
            None => Some(c),
            Some(b) if c.f1 > b.f1 || (c.f1 == b.f1 && c.k < b.k) => Some(c),
            Some(b) => Some(b),
        })
        .ok_or(RiceError::NoQualifyingClustering)
}

#[derive(Debug, Clone)]
pub struct RiceMap {
    pub labels: Vec<usize>,
    pub total_area_ha: f64,
    /// Present when a truth vector was supplied.
    pub metrics: Option<ClassMetrics>,
}

/// Train a forest on the pseudo-labels and classify every row. Rice area is
/// the positive count scaled by the per-pixel area.
#[allow(clippy::too_many_arguments)]
pub fn rice_map(
    x_all: &[Vec<f64>],
    feature_names: &[String],
    pseudo_labels: &[usize],
    truth: Option<&[usize]>,
    n_trees: usize,
    max_depth: usize,
    pixel_area_ha: f64,
    seed: u64,
    parallel: bool,
) -> Result<RiceMap, RiceError> {
    let ds = Dataset::new(
        x_all.to_vec(),
        Labels::Class(pseudo_labels.to_vec()),
        feature_names.to_vec(),
    );
    let model = rf_fit(&ds, n_trees, max_depth, seed, parallel)?;
    let (labels, _) = rf_predict_class(&model, x_all)?;
    let rice_pixels = labels.iter().filter(|&&l| l == 1).count();
    let total_area_ha = rice_pixels as f64 * pixel_area_ha;
    let metrics = match truth {
        Some(t) => Some(classification_metrics(&ConfusionMatrix::from_pairs(t, &labels)?)?),
        None => None,
    };
    Ok(RiceMap { labels, total_area_ha, metrics })
}

/// F1 of binary labels against truth, the score used across the pipeline.
pub fn binary_f1(truth: &[usize], pred: &[usize]) -> f64 {
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&t, &p) in truth.iter().zip(pred) {
        match (p == 1, t == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    2.0 * precision * recall / (precision + recall)
}
