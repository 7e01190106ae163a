use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{sq_dist, MlError};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub k: usize,
    pub seed: u64,
}

/// k-means++ seeding: first center uniform, the rest sampled proportional to
/// the squared distance to the nearest chosen center. Shared with fcm.
pub(crate) fn plus_plus_init(x: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(x[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = x.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            pick
        } else {
            rng.gen_range(0..n) // all points coincide with a center
        };
        centers.push(x[next].clone());
        for (i, p) in x.iter().enumerate() {
            let d = sq_dist(p, &centers[centers.len() - 1]);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Lloyd iterations from a k-means++ start; converged when no centroid moves
/// more than tol (Euclidean). Empty clusters are re-seeded with the point
/// farthest from its assigned centroid.
pub fn kmeans_fit(
    x: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(KMeansModel, Vec<usize>), MlError> {
    if k == 0 {
        return Err(MlError::InvalidParam("k must be at least 1"));
    }
    if k > x.len() {
        return Err(MlError::TooManyClusters);
    }
    let d = x[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut assign = vec![0usize; x.len()];
    for _ in 0..max_iter {
        for (i, p) in x.iter().enumerate() {
            assign[i] = nearest(&centroids, p);
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in x.iter().enumerate() {
            counts[assign[i]] += 1;
            for (s, &v) in sums[assign[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                // farthest point from its own centroid takes over the cluster
                let far = (0..x.len())
                    .max_by(|&a, &b| {
                        let da = sq_dist(&x[a], &centroids[assign[a]]);
                        let db = sq_dist(&x[b], &centroids[assign[b]]);
                        da.partial_cmp(&db).unwrap().then(b.cmp(&a))
                    })
                    .unwrap();
                sums[j] = x[far].clone();
                counts[j] = 1;
                assign[far] = j;
            }
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            let mut moved = 0.0;
            for (c, s) in centroids[j].iter_mut().zip(&sums[j]) {
                let next = s / counts[j] as f64;
                moved += (next - *c) * (next - *c);
                *c = next;
            }
            shift = shift.max(moved.sqrt());
        }
        if shift < tol {
            break;
        }
    }
    for (i, p) in x.iter().enumerate() {
        assign[i] = nearest(&centroids, p);
    }
    Ok((KMeansModel { centroids, k, seed }, assign))
}
