use std::collections::BTreeMap;

use ml_core::{rf_fit, splitmix64, Dataset, Labels, RandomForestModel};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{ContinuousStage, PhenoError, Stage, STAGE_DOY_RANGES};

pub const DEFAULT_TW: u32 = 75;
pub const DEFAULT_SLOPE_STEP: u32 = 5;
pub const DEFAULT_TRAIN_EVERY: u32 = 5;
pub const MIN_DATE_SAMPLES: usize = 50;

/// A ground-truthed parcel: feature series over the season plus the observed
/// day span of each stage.
#[derive(Debug, Clone)]
pub struct ReferenceParcel {
    /// feature -> (day, value), days strictly increasing.
    pub series: BTreeMap<String, Vec<(u32, f64)>>,
    /// (stage, first day, last day)
    pub boundaries: Vec<(Stage, u32, u32)>,
}

impl ReferenceParcel {
    fn span(&self, stage: Stage) -> Option<(u32, u32)> {
        self.boundaries.iter().find(|(s, _, _)| *s == stage).map(|&(_, a, b)| (a, b))
    }
}

fn value_at(series: &[(u32, f64)], day: u32) -> f64 {
    let first = series.first().expect("series not empty");
    let last = series.last().unwrap();
    assert!(
        day >= first.0 && day <= last.0,
        "day {day} outside series coverage [{}, {}]",
        first.0,
        last.0
    );
    match series.binary_search_by_key(&day, |&(d, _)| d) {
        Ok(i) => series[i].1,
        Err(i) => {
            let (d0, v0) = series[i - 1];
            let (d1, v1) = series[i];
            v0 + (v1 - v0) * (day - d0) as f64 / (d1 - d0) as f64
        }
    }
}

/// Slopes of the tw-long window ending at `end`, one per step of s days.
fn window_slopes(series: &[(u32, f64)], end: u32, tw: u32, s: u32) -> Vec<f64> {
    assert!(s > 0 && tw % s == 0, "window must divide into whole steps");
    let start = end - tw;
    (0..tw / s)
        .map(|j| {
            let a = value_at(series, start + j * s);
            let b = value_at(series, start + (j + 1) * s);
            (b - a) / s as f64
        })
        .collect()
}

fn mae(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Stages whose season window contains the day.
pub fn admissible_stages(dop: u32) -> Vec<Stage> {
    STAGE_DOY_RANGES
        .iter()
        .filter(|&&(_, lo, hi)| dop >= lo && dop <= hi)
        .map(|&(s, _, _)| s)
        .collect()
}

/// Slide a tw-long slope window over every in-stage end day of every
/// reference parcel, keep the three closest matches per feature, and take
/// the median of their implied scale positions.
pub fn predict_continuous(
    query: &BTreeMap<String, Vec<(u32, f64)>>,
    refs: &[ReferenceParcel],
    dop: u32,
    tw: u32,
    s: u32,
) -> Result<ContinuousStage, PhenoError> {
    let candidates = admissible_stages(dop);
    if candidates.is_empty() {
        return Err(PhenoError::OutOfSeason(dop));
    }
    let mut kept: Vec<f64> = Vec::new();
    for (feature, q_series) in query {
        let q_slopes = window_slopes(q_series, dop, tw, s);
        let mut scored: Vec<(f64, f64)> = Vec::new();
        for r in refs {
            let r_series = r
                .series
                .get(feature)
                .ok_or_else(|| PhenoError::MissingFeature(feature.clone()))?;
            let r_first = r_series.first().map(|&(d, _)| d).unwrap_or(u32::MAX);
            let r_last = r_series.last().map(|&(d, _)| d).unwrap_or(0);
            for &stage in &candidates {
                let Some((start, end)) = r.span(stage) else { continue };
                let mut day = start;
                while day <= end {
                    if day >= r_first + tw && day <= r_last {
                        let r_slopes = window_slopes(r_series, day, tw, s);
                        let frac = if end > start {
                            (day - start) as f64 / (end - start) as f64
                        } else {
                            0.0
                        };
                        let value = (stage.ordinal() * 100) as f64 + 100.0 * frac;
                        scored.push((mae(&q_slopes, &r_slopes), value));
                    }
                    day += s;
                }
            }
        }
        scored.sort_by(|a, b| a.partial_cmp(b).unwrap());
        kept.extend(scored.iter().take(3).map(|&(_, v)| v));
    }
    if kept.is_empty() {
        return Err(PhenoError::NoReferenceWindow(dop));
    }
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = kept.len() / 2;
    let median = if kept.len() % 2 == 1 { kept[mid] } else { (kept[mid - 1] + kept[mid]) / 2.0 };
    Ok(ContinuousStage::new(median))
}

/// Training inputs for one prediction date: features known by that day and
/// the continuous-scale pseudo-labels.
#[derive(Debug, Clone)]
pub struct DatedSamples {
    pub day: u32,
    pub x: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub feature_names: Vec<String>,
}

#[derive(Debug)]
pub struct StageRegressors {
    pub models: Vec<(u32, RandomForestModel)>,
    /// (day, holdout mean absolute error) for each trained date.
    pub holdout_mae: Vec<(u32, f64)>,
    /// (day, sample count) for dates below the sample floor.
    pub skipped: Vec<(u32, usize)>,
}

const DEPTH_GRID: [usize; 3] = [4, 8, 12];
const REGRESSOR_TREES: usize = 50;

fn train_one(d: &DatedSamples, seed: u64) -> Result<(u32, RandomForestModel, f64), PhenoError> {
    let n = d.x.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_hold = (n / 5).max(1);
    let (hold, train) = order.split_at(n_hold);

    let subset = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            idx.iter().map(|&i| d.x[i].clone()).collect(),
            idx.iter().map(|&i| d.labels[i]).collect(),
        )
    };
    let (xt, yt) = subset(train);
    let (xh, yh) = subset(hold);
    let train_ds = Dataset::new(xt, Labels::Real(yt), d.feature_names.clone());

    let mut best: Option<(f64, usize)> = None;
    for depth in DEPTH_GRID {
        let model = rf_fit(&train_ds, REGRESSOR_TREES, depth, seed, false)?;
        let pred = ml_core::rf_predict_real(&model, &xh)?;
        let err = pred.iter().zip(&yh).map(|(p, y)| (p - y).abs()).sum::<f64>() / xh.len() as f64;
        if best.map_or(true, |(e, _)| err < e) {
            best = Some((err, depth));
        }
    }
    let (err, depth) = best.unwrap();
    let full = Dataset::new(d.x.clone(), Labels::Real(d.labels.clone()), d.feature_names.clone());
    let model = rf_fit(&full, REGRESSOR_TREES, depth, seed, false)?;
    Ok((d.day, model, err))
}

/// One regressor per prediction date; depth picked by held-out error, then
/// refit on the full date sample. Dates under the sample floor are skipped
/// and reported.
pub fn train_stage_regressors(
    dated: &[DatedSamples],
    seed: u64,
    parallel: bool,
) -> Result<StageRegressors, PhenoError> {
    let mut skipped = Vec::new();
    let mut work: Vec<&DatedSamples> = Vec::new();
    for d in dated {
        assert_eq!(d.x.len(), d.labels.len());
        if d.x.len() < MIN_DATE_SAMPLES {
            skipped.push((d.day, d.x.len()));
        } else {
            work.push(d);
        }
    }
    let results = run_dates(&work, parallel, |d| {
        train_one(d, splitmix64(seed ^ (d.day as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    })?;
    let mut models = Vec::with_capacity(results.len());
    let mut holdout_mae = Vec::with_capacity(results.len());
    for (day, model, err) in results {
        models.push((day, model));
        holdout_mae.push((day, err));
    }
    Ok(StageRegressors { models, holdout_mae, skipped })
}

#[cfg(feature = "parallel")]
fn run_dates<F>(
    work: &[&DatedSamples],
    parallel: bool,
    f: F,
) -> Result<Vec<(u32, RandomForestModel, f64)>, PhenoError>
where
    F: Fn(&DatedSamples) -> Result<(u32, RandomForestModel, f64), PhenoError> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        work.par_iter().map(|d| f(d)).collect()
    } else {
        work.iter().map(|d| f(d)).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_dates<F>(
    work: &[&DatedSamples],
    _parallel: bool,
    f: F,
) -> Result<Vec<(u32, RandomForestModel, f64)>, PhenoError>
where
    F: Fn(&DatedSamples) -> Result<(u32, RandomForestModel, f64), PhenoError>,
{
    work.iter().map(|d| f(d)).collect()
}
