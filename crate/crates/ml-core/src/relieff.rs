use crate::{Dataset, Labels, MlError};

pub const DEFAULT_RELIEFF_K: usize = 80;

/// ReliefF scores over every sample, k nearest hits and k nearest misses
/// per class, range-normalized Manhattan distance. Neighbor ties break on
/// the lower sample index.
pub fn relieff(ds: &Dataset, k: usize) -> Result<Vec<f64>, MlError> {
    let Labels::Class(y) = &ds.labels else {
        return Err(MlError::InvalidParam("class labels required"));
    };
    if ds.is_empty() {
        return Err(MlError::EmptyData);
    }
    if k == 0 {
        return Err(MlError::InvalidParam("k must be at least 1"));
    }
    let n = ds.len();
    let d = ds.n_features();
    let n_classes = y.iter().max().unwrap() + 1;
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    if counts.iter().any(|&c| c > 0 && c <= k) {
        return Err(MlError::KTooLarge);
    }

    let mut range = vec![0.0f64; d];
    for f in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &ds.x {
            lo = lo.min(row[f]);
            hi = hi.max(row[f]);
        }
        range[f] = hi - lo;
    }
    let diff = |f: usize, a: &[f64], b: &[f64]| -> f64 {
        if range[f] == 0.0 {
            0.0
        } else {
            (a[f] - b[f]).abs() / range[f]
        }
    };
    let dist = |a: &[f64], b: &[f64]| -> f64 { (0..d).map(|f| diff(f, a, b)).sum() };

    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let mut w = vec![0.0f64; d];
    let mk = (n * k) as f64;

    // per-class candidate lists sorted by (distance to R, index)
    let mut by_class: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n_classes];
    for r in 0..n {
        for list in &mut by_class {
            list.clear();
        }
        for i in 0..n {
            if i == r {
                continue;
            }
            by_class[y[i]].push((dist(&ds.x[r], &ds.x[i]), i));
        }
        for list in &mut by_class {
            list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        }
        for &(_, i) in by_class[y[r]].iter().take(k) {
            for (f, wf) in w.iter_mut().enumerate() {
                *wf -= diff(f, &ds.x[r], &ds.x[i]) / mk;
            }
        }
        for c in 0..n_classes {
            if c == y[r] || counts[c] == 0 {
                continue;
            }
            let scale = priors[c] / (1.0 - priors[y[r]]);
            for &(_, i) in by_class[c].iter().take(k) {
                for (f, wf) in w.iter_mut().enumerate() {
                    *wf += scale * diff(f, &ds.x[r], &ds.x[i]) / mk;
                }
            }
        }
    }
    Ok(w)
}
