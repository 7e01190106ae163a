use std::collections::BTreeMap;

use ml_core::{fcm_fit, fcm_membership, FcmModel};

use crate::eval::PhenoPrediction;
use crate::{ElementSpace, Metaclass, PhenoError, Stage, STAGES};

pub const FCM_CLUSTERS: usize = 6;
pub const FCM_FUZZIFIER: f64 = 2.0;
pub const TH_W_PERCENTILE: f64 = 98.0;
pub const DOY_SIN: &str = "doy_sin";
pub const DOY_COS: &str = "doy_cos";

/// Fuzzy clustering plus the season mapping that turns cluster weights into
/// stage weights, and the partition threshold deciding when the second stage
/// counts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FcmPhenoModel {
    pub fcm: FcmModel,
    /// cluster index -> stage; a bijection.
    pub stage_order: Vec<Stage>,
    pub th_w: f64,
    pub feature_set: Vec<String>,
}

/// Nearest-rank percentile: the smallest value with at least p percent of
/// the sample at or below it.
pub fn nearest_rank_percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty() && (0.0..=100.0).contains(&p));
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((p / 100.0 * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Compressed cluster visit order per field; only fields visiting every
/// cluster exactly once cast a vote.
fn modal_order(
    rows: &[(i64, u32)],
    memberships: &[Vec<f64>],
    c: usize,
) -> Result<Vec<usize>, PhenoError> {
    let mut votes: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut i = 0;
    while i < rows.len() {
        let field = rows[i].0;
        let mut seq: Vec<usize> = Vec::new();
        while i < rows.len() && rows[i].0 == field {
            let a = argmax(&memberships[i]);
            if seq.last() != Some(&a) {
                seq.push(a);
            }
            i += 1;
        }
        let mut sorted = seq.clone();
        sorted.sort_unstable();
        if sorted == (0..c).collect::<Vec<_>>() {
            *votes.entry(seq).or_insert(0) += 1;
        }
    }
    let best = votes.values().copied().max().ok_or(PhenoError::AmbiguousStageOrder)?;
    let mut winners = votes.iter().filter(|(_, &n)| n == best);
    let order = winners.next().unwrap().0.clone();
    if winners.next().is_some() {
        return Err(PhenoError::AmbiguousStageOrder);
    }
    Ok(order)
}

fn fit_on(
    x: Vec<Vec<f64>>,
    rows: &[(i64, u32)],
    feature_set: Vec<String>,
    seed: u64,
) -> Result<FcmPhenoModel, PhenoError> {
    let fit = fcm_fit(&x, FCM_CLUSTERS, FCM_FUZZIFIER, seed, 300, 1e-6)?;
    let order = modal_order(rows, &fit.memberships, FCM_CLUSTERS)?;
    let mut stage_order = vec![Stage::RE; FCM_CLUSTERS];
    for (pos, &cluster) in order.iter().enumerate() {
        stage_order[cluster] = STAGES[pos];
    }
    let thirds: Vec<f64> = fit
        .memberships
        .iter()
        .map(|row| {
            let mut w = row.clone();
            w.sort_by(|a, b| b.partial_cmp(a).unwrap());
            w[2]
        })
        .collect();
    let th_w = nearest_rank_percentile(&thirds, TH_W_PERCENTILE);
    debug_assert!(th_w > 0.0 && th_w < 0.5, "partition threshold {th_w} out of (0, 1/2)");
    Ok(FcmPhenoModel { fcm: fit.model, stage_order, th_w, feature_set })
}

/// Fit the six-cluster model on every feature column of the element space.
/// The season order of clusters is the most common per-field visit order.
pub fn fit_phenology(space: &ElementSpace, seed: u64) -> Result<FcmPhenoModel, PhenoError> {
    fit_on(
        space.dataset.x.clone(),
        &space.rows,
        space.dataset.feature_names.clone(),
        seed,
    )
}

/// Same pipeline restricted to the day-of-year sine and cosine columns.
pub fn baseline_doy(space: &ElementSpace, seed: u64) -> Result<FcmPhenoModel, PhenoError> {
    let names = vec![DOY_SIN.to_string(), DOY_COS.to_string()];
    let x = space.columns(&names)?;
    fit_on(x, &space.rows, names, seed)
}

/// Turn a stage weight vector into the admissible metaclass: the runner-up
/// becomes the secondary only when it clears th_w and adjoins the primary.
pub fn metaclass_from_weights(weights: &[(Stage, f64)], th_w: f64) -> PhenoPrediction {
    assert_eq!(weights.len(), 6, "one weight per stage");
    let mut ranked = weights.to_vec();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1).unwrap().then(a.0.ordinal().cmp(&b.0.ordinal()))
    });
    let primary = ranked[0].0;
    let (second, w2) = ranked[1];
    let metaclass = if w2 >= th_w && primary.ordinal().abs_diff(second.ordinal()) == 1 {
        Metaclass::pair(primary, second).unwrap()
    } else {
        Metaclass::unit(primary)
    };
    PhenoPrediction { metaclass, ranked }
}

/// Membership of one feature row, mapped through the season order.
pub fn predict_metaclass(model: &FcmPhenoModel, x: &[f64]) -> PhenoPrediction {
    assert_eq!(x.len(), model.feature_set.len(), "feature count mismatch");
    let w = fcm_membership(&model.fcm, x);
    let weights: Vec<(Stage, f64)> =
        w.iter().enumerate().map(|(c, &wc)| (model.stage_order[c], wc)).collect();
    metaclass_from_weights(&weights, model.th_w)
}

fn project(model: &FcmPhenoModel, named: &BTreeMap<String, f64>) -> Result<Vec<f64>, PhenoError> {
    model
        .feature_set
        .iter()
        .map(|n| named.get(n).copied().ok_or_else(|| PhenoError::MissingFeature(n.clone())))
        .collect()
}

/// Modal metaclass across models; a tie goes to the tied metaclass whose
/// voters gave its primary stage the highest mean weight.
pub fn ensemble_vote(
    models: &[FcmPhenoModel],
    named: &BTreeMap<String, f64>,
) -> Result<Metaclass, PhenoError> {
    if models.is_empty() {
        return Err(PhenoError::EmptyEval);
    }
    let preds: Vec<PhenoPrediction> = models
        .iter()
        .map(|m| Ok(predict_metaclass(m, &project(m, named)?)))
        .collect::<Result<_, PhenoError>>()?;
    let mut votes: BTreeMap<usize, Vec<&PhenoPrediction>> = BTreeMap::new();
    for p in &preds {
        votes.entry(p.metaclass.index()).or_default().push(p);
    }
    let top = votes.values().map(|v| v.len()).max().unwrap();
    let winner = votes
        .iter()
        .filter(|(_, v)| v.len() == top)
        .map(|(&idx, voters)| {
            let mean: f64 = voters
                .iter()
                .map(|p| {
                    let primary = p.metaclass.primary();
                    p.ranked.iter().find(|(s, _)| *s == primary).unwrap().1
                })
                .sum::<f64>()
                / voters.len() as f64;
            (mean, idx)
        })
        .fold(None::<(f64, usize)>, |best, cand| match best {
            None => Some(cand),
            Some(b) if cand.0 > b.0 => Some(cand),
            Some(b) => Some(b),
        })
        .unwrap()
        .1;
    Metaclass::from_index(winner)
}
