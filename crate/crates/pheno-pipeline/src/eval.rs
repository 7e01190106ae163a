use ml_core::{classification_metrics, ConfusionMatrix};

use crate::{Metaclass, PhenoError, Stage};

#[derive(Debug, Clone, PartialEq)]
pub struct PhenoPrediction {
    pub metaclass: Metaclass,
    /// All six stages, weight descending.
    pub ranked: Vec<(Stage, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhenoEval {
    /// Fraction of samples displaced by at most 0, 1, 2, 3 metaclass
    /// positions.
    pub maxdiff: [f64; 4],
    pub kappa: f64,
    pub kappa_linear: f64,
    pub kappa_quadratic: f64,
    pub ndcg2: f64,
    /// Mean absolute displacement keyed by truth metaclass index - 1; None
    /// where the truth class never occurs.
    pub mean_displacement: Vec<Option<f64>>,
}

fn rel(stage: Stage, truth: &Metaclass) -> f64 {
    if stage == truth.primary() {
        2.0
    } else if Some(stage) == truth.secondary() {
        1.0
    } else {
        0.0
    }
}

/// Ranked-label scoring on the 16-point metaclass scale.
pub fn eval_phenology(
    preds: &[PhenoPrediction],
    truths: &[Metaclass],
) -> Result<PhenoEval, PhenoError> {
    if preds.is_empty() || truths.is_empty() {
        return Err(PhenoError::EmptyEval);
    }
    assert_eq!(preds.len(), truths.len(), "prediction/truth length mismatch");
    let n = preds.len() as f64;

    let mut maxdiff = [0.0f64; 4];
    let mut counts = vec![vec![0u64; 16]; 16];
    let mut disp_sum = vec![0.0f64; 16];
    let mut disp_n = vec![0usize; 16];
    let mut ndcg_sum = 0.0;
    let log2_3 = 3f64.log2();

    for (p, t) in preds.iter().zip(truths) {
        let pi = p.metaclass.index();
        let ti = t.index();
        let d = pi.abs_diff(ti);
        for (o, slot) in maxdiff.iter_mut().enumerate() {
            if d <= o {
                *slot += 1.0;
            }
        }
        counts[ti - 1][pi - 1] += 1;
        disp_sum[ti - 1] += d as f64;
        disp_n[ti - 1] += 1;

        let dcg = rel(p.ranked[0].0, t) + rel(p.ranked[1].0, t) / log2_3;
        let idcg = 2.0 + if t.secondary().is_some() { 1.0 / log2_3 } else { 0.0 };
        ndcg_sum += dcg / idcg;
    }
    for slot in &mut maxdiff {
        *slot /= n;
    }
    let m = classification_metrics(&ConfusionMatrix::new(counts)?)?;
    let mean_displacement = disp_sum
        .iter()
        .zip(&disp_n)
        .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    Ok(PhenoEval {
        maxdiff,
        kappa: m.kappa,
        kappa_linear: m.kappa_linear,
        kappa_quadratic: m.kappa_quadratic,
        ndcg2: ndcg_sum / n,
        mean_displacement,
    })
}
