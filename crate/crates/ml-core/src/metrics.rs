use crate::MlError;

/// Square count matrix, rows are truth, columns are prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self, MlError> {
        if counts.is_empty() {
            return Err(MlError::EmptyData);
        }
        if counts.iter().any(|r| r.len() != counts.len()) {
            return Err(MlError::InvalidParam("confusion matrix must be square"));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn from_pairs(truth: &[usize], pred: &[usize]) -> Result<Self, MlError> {
        if truth.len() != pred.len() {
            return Err(MlError::InvalidParam("truth and prediction lengths differ"));
        }
        if truth.is_empty() {
            return Err(MlError::EmptyData);
        }
        let c = truth.iter().chain(pred).max().unwrap() + 1;
        let mut counts = vec![vec![0u64; c]; c];
        for (&t, &p) in truth.iter().zip(pred) {
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth][pred]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        self.counts[truth].iter().sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        self.counts.iter().map(|r| r[pred]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Per-class accuracies are None when the corresponding marginal is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub producer_accuracy: Vec<Option<f64>>,
    pub user_accuracy: Vec<Option<f64>>,
    pub f1: Vec<Option<f64>>,
    pub overall_accuracy: f64,
    pub kappa: f64,
    pub kappa_linear: f64,
    pub kappa_quadratic: f64,
}

fn weighted_kappa(cm: &ConfusionMatrix, weight: impl Fn(usize, usize) -> f64) -> f64 {
    let c = cm.n_classes();
    let total = cm.total() as f64;
    let mut obs = 0.0;
    let mut exp = 0.0;
    for i in 0..c {
        for j in 0..c {
            let w = weight(i, j);
            obs += w * cm.count(i, j) as f64 / total;
            exp += w * (cm.row_sum(i) as f64 / total) * (cm.col_sum(j) as f64 / total);
        }
    }
    if exp == 0.0 {
        // no expected disagreement: degenerate marginals, nothing to correct
        return 1.0;
    }
    1.0 - obs / exp
}

pub fn classification_metrics(cm: &ConfusionMatrix) -> Result<ClassMetrics, MlError> {
    let total = cm.total();
    if total == 0 {
        return Err(MlError::EmptyData);
    }
    let c = cm.n_classes();
    let mut producer_accuracy = Vec::with_capacity(c);
    let mut user_accuracy = Vec::with_capacity(c);
    let mut f1 = Vec::with_capacity(c);
    for i in 0..c {
        let diag = cm.count(i, i) as f64;
        let pa = match cm.row_sum(i) {
            0 => None,
            s => Some(diag / s as f64),
        };
        let ua = match cm.col_sum(i) {
            0 => None,
            s => Some(diag / s as f64),
        };
        let f = match (pa, ua) {
            (Some(p), Some(u)) if p + u > 0.0 => Some(2.0 * p * u / (p + u)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        producer_accuracy.push(pa);
        user_accuracy.push(ua);
        f1.push(f);
    }
    let overall_accuracy =
        (0..c).map(|i| cm.count(i, i)).sum::<u64>() as f64 / total as f64;
    let kappa = weighted_kappa(cm, |i, j| if i == j { 0.0 } else { 1.0 });
    let span = if c > 1 { (c - 1) as f64 } else { 1.0 };
    let kappa_linear = weighted_kappa(cm, |i, j| (i as f64 - j as f64).abs() / span);
    let kappa_quadratic = weighted_kappa(cm, |i, j| {
        let d = (i as f64 - j as f64).abs() / span;
        d * d
    });
    Ok(ClassMetrics {
        producer_accuracy,
        user_accuracy,
        f1,
        overall_accuracy,
        kappa,
        kappa_linear,
        kappa_quadratic,
    })
}

/// McNemar's statistic over the two discordant counts.
pub fn mcnemar(n_ab: u64, n_ba: u64) -> Result<f64, MlError> {
    if n_ab + n_ba == 0 {
        return Err(MlError::McNemarUndefined);
    }
    let d = n_ab as f64 - n_ba as f64;
    Ok(d * d / (n_ab + n_ba) as f64)
}

/// Krippendorff's alpha with the ordinal difference function. `ratings` is
/// raters x items; None marks a missing rating. Items rated by fewer than
/// two raters drop out.
pub fn krippendorff_alpha_ordinal(ratings: &[Vec<Option<usize>>]) -> Result<f64, MlError> {
    if ratings.is_empty() {
        return Err(MlError::NoPairableRatings);
    }
    let n_items = ratings[0].len();
    assert!(ratings.iter().all(|r| r.len() == n_items), "raters rate the same item list");

    let n_cats = ratings
        .iter()
        .flatten()
        .flatten()
        .max()
        .map_or(0, |&m| m + 1);
    if n_cats == 0 {
        return Err(MlError::NoPairableRatings);
    }
    let mut coincidence = vec![vec![0.0f64; n_cats]; n_cats];
    let mut any_pairable = false;
    for item in 0..n_items {
        let vals: Vec<usize> = ratings.iter().filter_map(|r| r[item]).collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        any_pairable = true;
        let w = 1.0 / (m as f64 - 1.0);
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    coincidence[vals[a]][vals[b]] += w;
                }
            }
        }
    }
    if !any_pairable {
        return Err(MlError::NoPairableRatings);
    }
    let marginal: Vec<f64> = (0..n_cats).map(|c| coincidence[c].iter().sum()).collect();
    let n: f64 = marginal.iter().sum();
    // ordinal distance: cumulative marginal mass between the two categories
    let delta_sq = |c: usize, k: usize| -> f64 {
        let mid: f64 = (c..=k).map(|g| marginal[g]).sum();
        let d = mid - (marginal[c] + marginal[k]) / 2.0;
        d * d
    };
    let mut d_obs = 0.0;
    let mut d_exp = 0.0;
    for c in 0..n_cats {
        for k in c + 1..n_cats {
            let d2 = delta_sq(c, k);
            d_obs += coincidence[c][k] * d2;
            d_exp += marginal[c] * marginal[k] * d2;
        }
    }
    if d_exp == 0.0 {
        // a single observed category cannot disagree with itself
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * d_obs / d_exp)
}
