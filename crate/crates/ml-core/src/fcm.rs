use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kmeans::plus_plus_init;
use crate::{sq_dist, MlError};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FcmModel {
    pub centers: Vec<Vec<f64>>,
    pub m: f64,
    pub c: usize,
}

#[derive(Debug, Clone)]
pub struct FcmFit {
    pub model: FcmModel,
    pub memberships: Vec<Vec<f64>>,
    /// Objective J = sum w^m d^2 recorded after every iteration; callers
    /// assert it never increases.
    pub objective_trace: Vec<f64>,
}

/// Membership row for one point given fixed centers. A point sitting on a
/// center gets weight 1 there (split evenly when several centers coincide).
pub fn fcm_membership(model: &FcmModel, x: &[f64]) -> Vec<f64> {
    membership(&model.centers, model.m, x)
}

fn membership(centers: &[Vec<f64>], m: f64, x: &[f64]) -> Vec<f64> {
    let c = centers.len();
    let d: Vec<f64> = centers.iter().map(|ct| sq_dist(x, ct).sqrt()).collect();
    let zero: Vec<usize> = (0..c).filter(|&j| d[j] == 0.0).collect();
    if !zero.is_empty() {
        let mut w = vec![0.0; c];
        for &j in &zero {
            w[j] = 1.0 / zero.len() as f64;
        }
        return w;
    }
    let p = 2.0 / (m - 1.0);
    (0..c)
        .map(|l| {
            let s: f64 = (0..c).map(|j| (d[l] / d[j]).powf(p)).sum();
            1.0 / s
        })
        .collect()
}

/// Standard alternating FCM: memberships from centers, centers from
/// m-powered memberships, stop when centers settle within tol.
pub fn fcm_fit(
    x: &[Vec<f64>],
    c: usize,
    m: f64,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<FcmFit, MlError> {
    if m <= 1.0 {
        return Err(MlError::InvalidFuzzifier);
    }
    if c == 0 {
        return Err(MlError::InvalidParam("c must be at least 1"));
    }
    if c > x.len() {
        return Err(MlError::TooManyClusters);
    }
    let dim = x[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(x, c, &mut rng);
    let mut w = vec![vec![0.0; c]; x.len()];
    let mut trace = Vec::new();
    for _ in 0..max_iter {
        for (i, p) in x.iter().enumerate() {
            w[i] = membership(&centers, m, p);
        }
        let mut shift: f64 = 0.0;
        for l in 0..c {
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            for (i, p) in x.iter().enumerate() {
                let wm = w[i][l].powf(m);
                den += wm;
                for (nv, &pv) in num.iter_mut().zip(p) {
                    *nv += wm * pv;
                }
            }
            if den == 0.0 {
                continue; // no mass: keep the center where it is
            }
            let mut moved = 0.0;
            for (cv, nv) in centers[l].iter_mut().zip(&num) {
                let next = nv / den;
                moved += (next - *cv) * (next - *cv);
                *cv = next;
            }
            shift = shift.max(moved.sqrt());
        }
        let objective: f64 = x
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (0..c).map(|l| w[i][l].powf(m) * sq_dist(p, &centers[l])).sum::<f64>()
            })
            .sum();
        trace.push(objective);
        if shift < tol {
            break;
        }
    }
    // memberships against the final centers
    for (i, p) in x.iter().enumerate() {
        w[i] = membership(&centers, m, p);
    }
    Ok(FcmFit { model: FcmModel { centers, m, c }, memberships: w, objective_trace: trace })
}
