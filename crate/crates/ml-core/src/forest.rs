use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{splitmix64, Dataset, Labels, MlError};

pub const DEFAULT_N_TREES: usize = 50;
pub const DEFAULT_MAX_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Classify,
    Regress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
    LeafClass { histogram: Vec<u32> },
    LeafReal { mean: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Default, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<Tree>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub task: Task,
    pub n_classes: usize,
    pub n_features: usize,
    /// Mean decrease in impurity, averaged over trees, normalized to sum 1.
    pub feature_importance: Vec<f64>,
}

enum Target<'a> {
    Class(&'a [usize], usize),
    Real(&'a [f64]),
}

fn gini(counts: &[u32], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t) * (c as f64 / t)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    target: &'a Target<'a>,
    max_depth: usize,
    n_feat_sub: usize,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
    n_root: f64,
}

impl<'a> Builder<'a> {
    fn leaf(&mut self, idx: &[usize]) -> u32 {
        let node = match self.target {
            Target::Class(y, n_classes) => {
                let mut histogram = vec![0u32; *n_classes];
                for &i in idx {
                    histogram[y[i]] += 1;
                }
                TreeNode::LeafClass { histogram }
            }
            Target::Real(y) => {
                let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
                TreeNode::LeafReal { mean }
            }
        };
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    fn node_impurity(&self, idx: &[usize]) -> f64 {
        match self.target {
            Target::Class(y, n_classes) => {
                let mut counts = vec![0u32; *n_classes];
                for &i in idx {
                    counts[y[i]] += 1;
                }
                gini(&counts, idx.len() as u32)
            }
            Target::Real(y) => {
                let n = idx.len() as f64;
                let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / n;
                idx.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum::<f64>() / n
            }
        }
    }

    /// Best (threshold, weighted child impurity) on one feature, scanning
    /// midpoints of adjacent distinct sorted values. Lower threshold wins
    /// ties because candidates arrive in ascending order and only a strict
    /// improvement replaces the incumbent.
    fn best_on_feature(&self, idx: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| {
            self.x[a][feature].partial_cmp(&self.x[b][feature]).unwrap().then(a.cmp(&b))
        });
        let n = order.len();
        let mut best: Option<(f64, f64)> = None;
        match self.target {
            Target::Class(y, n_classes) => {
                let mut left = vec![0u32; *n_classes];
                let mut right = vec![0u32; *n_classes];
                for &i in &order {
                    right[y[i]] += 1;
                }
                for pos in 0..n - 1 {
                    let i = order[pos];
                    left[y[i]] += 1;
                    right[y[i]] -= 1;
                    let (a, b) = (self.x[i][feature], self.x[order[pos + 1]][feature]);
                    if a == b {
                        continue;
                    }
                    let nl = (pos + 1) as u32;
                    let nr = (n - pos - 1) as u32;
                    let w = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                    if best.map_or(true, |(_, bw)| w < bw) {
                        best = Some(((a + b) / 2.0, w));
                    }
                }
            }
            Target::Real(y) => {
                let mut ls = 0.0;
                let mut ls2 = 0.0;
                let mut rs: f64 = order.iter().map(|&i| y[i]).sum();
                let mut rs2: f64 = order.iter().map(|&i| y[i] * y[i]).sum();
                for pos in 0..n - 1 {
                    let i = order[pos];
                    ls += y[i];
                    ls2 += y[i] * y[i];
                    rs -= y[i];
                    rs2 -= y[i] * y[i];
                    let (a, b) = (self.x[i][feature], self.x[order[pos + 1]][feature]);
                    if a == b {
                        continue;
                    }
                    let nl = (pos + 1) as f64;
                    let nr = (n - pos - 1) as f64;
                    // weighted variance = (SSE_l + SSE_r) / n
                    let sse_l = ls2 - ls * ls / nl;
                    let sse_r = rs2 - rs * rs / nr;
                    let w = (sse_l + sse_r) / n as f64;
                    if best.map_or(true, |(_, bw)| w < bw) {
                        best = Some(((a + b) / 2.0, w));
                    }
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> u32 {
        let pure = match self.target {
            Target::Class(y, _) => idx.windows(2).all(|w| y[w[0]] == y[w[1]]),
            Target::Real(y) => idx.windows(2).all(|w| y[w[0]] == y[w[1]]),
        };
        if depth >= self.max_depth || idx.len() < 2 || pure {
            return self.leaf(idx);
        }
        // partial Fisher-Yates draw of the feature subset, then ascending scan
        let d = self.x[0].len();
        let mut pool: Vec<usize> = (0..d).collect();
        for i in 0..self.n_feat_sub {
            let j = rng.gen_range(i..d);
            pool.swap(i, j);
        }
        let mut subset: Vec<usize> = pool[..self.n_feat_sub].to_vec();
        subset.sort_unstable();

        let parent = self.node_impurity(idx);
        let mut best: Option<(usize, f64, f64)> = None;
        for &feature in &subset {
            if let Some((threshold, w)) = self.best_on_feature(idx, feature) {
                if best.map_or(true, |(_, _, bw)| w < bw) {
                    best = Some((feature, threshold, w));
                }
            }
        }
        let Some((feature, threshold, w)) = best else {
            return self.leaf(idx);
        };
        if parent - w <= 0.0 {
            return self.leaf(idx);
        }
        self.importance[feature] += (idx.len() as f64 / self.n_root) * (parent - w);

        let (mut li, mut ri) = (Vec::new(), Vec::new());
        for &i in idx {
            if self.x[i][feature] <= threshold {
                li.push(i);
            } else {
                ri.push(i);
            }
        }
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Split { feature, threshold, left: 0, right: 0 });
        let left = self.build(&li, depth + 1, rng);
        let right = self.build(&ri, depth + 1, rng);
        let TreeNode::Split { left: l, right: r, .. } = &mut self.nodes[at] else { unreachable!() };
        *l = left;
        *r = right;
        at as u32
    }
}

fn train_tree(
    x: &[Vec<f64>],
    target: &Target,
    max_depth: usize,
    tree_seed: u64,
) -> (Tree, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    idx.sort_unstable(); // row-major bootstrap keeps split scans cache-friendly
    let d = x[0].len();
    let n_feat_sub = ((d as f64).sqrt().floor() as usize).max(1);
    let mut b = Builder {
        x,
        target,
        max_depth,
        n_feat_sub,
        nodes: Vec::new(),
        importance: vec![0.0; d],
        n_root: idx.len() as f64,
    };
    b.build(&idx, 0, &mut rng);
    (Tree { nodes: b.nodes }, b.importance)
}

/// Bagged forest, sqrt(d) features per split, exact midpoint threshold
/// search. Tree t trains from its own pre-derived rng stream, so the parallel
/// and serial paths build identical forests.
pub fn rf_fit(
    ds: &Dataset,
    n_trees: usize,
    max_depth: usize,
    seed: u64,
    parallel: bool,
) -> Result<RandomForestModel, MlError> {
    if ds.is_empty() {
        return Err(MlError::EmptyData);
    }
    if n_trees == 0 {
        return Err(MlError::InvalidParam("n_trees must be at least 1"));
    }
    let (target, task, n_classes) = match &ds.labels {
        Labels::Class(y) => {
            let n_classes = y.iter().max().unwrap() + 1;
            (Target::Class(y, n_classes), Task::Classify, n_classes)
        }
        Labels::Real(y) => (Target::Real(y), Task::Regress, 0),
        Labels::None => return Err(MlError::InvalidParam("labels required")),
    };
    let seeds: Vec<u64> =
        (0..n_trees as u64).map(|t| splitmix64(seed ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15))).collect();

    let results: Vec<(Tree, Vec<f64>)> =
        run_trees(&seeds, parallel, |s| train_tree(&ds.x, &target, max_depth, s));

    let d = ds.n_features();
    let mut importance = vec![0.0; d];
    let mut trees = Vec::with_capacity(n_trees);
    for (tree, imp) in results {
        for (acc, v) in importance.iter_mut().zip(&imp) {
            *acc += v / n_trees as f64;
        }
        trees.push(tree);
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        for v in &mut importance {
            *v /= total;
        }
    }
    Ok(RandomForestModel {
        trees,
        n_trees,
        max_depth,
        seed,
        task,
        n_classes,
        n_features: d,
        feature_importance: importance,
    })
}

#[cfg(feature = "parallel")]
fn run_trees<F>(seeds: &[u64], parallel: bool, f: F) -> Vec<(Tree, Vec<f64>)>
where
    F: Fn(u64) -> (Tree, Vec<f64>) + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        seeds.par_iter().map(|&s| f(s)).collect()
    } else {
        seeds.iter().map(|&s| f(s)).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_trees<F>(seeds: &[u64], _parallel: bool, f: F) -> Vec<(Tree, Vec<f64>)>
where
    F: Fn(u64) -> (Tree, Vec<f64>),
{
    seeds.iter().map(|&s| f(s)).collect()
}

fn descend<'a>(tree: &'a Tree, row: &[f64]) -> &'a TreeNode {
    let mut at = 0usize;
    loop {
        match &tree.nodes[at] {
            TreeNode::Split { feature, threshold, left, right } => {
                at = if row[*feature] <= *threshold { *left as usize } else { *right as usize };
            }
            leaf => return leaf,
        }
    }
}

/// Class predictions with probabilities = mean of per-tree leaf frequencies.
/// Probability ties argmax to the lowest class id.
pub fn rf_predict_class(
    model: &RandomForestModel,
    rows: &[Vec<f64>],
) -> Result<(Vec<usize>, Vec<Vec<f64>>), MlError> {
    if model.task != Task::Classify {
        return Err(MlError::InvalidParam("model does not classify"));
    }
    let mut labels = Vec::with_capacity(rows.len());
    let mut probs = Vec::with_capacity(rows.len());
    for row in rows {
        let mut p = vec![0.0; model.n_classes];
        for tree in &model.trees {
            if let TreeNode::LeafClass { histogram } = descend(tree, row) {
                let total: u32 = histogram.iter().sum();
                if total > 0 {
                    for (pv, &h) in p.iter_mut().zip(histogram) {
                        *pv += h as f64 / total as f64 / model.trees.len() as f64;
                    }
                }
            }
        }
        let mut best = 0;
        for (c, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = c;
            }
        }
        labels.push(best);
        probs.push(p);
    }
    Ok((labels, probs))
}

pub fn rf_predict_real(model: &RandomForestModel, rows: &[Vec<f64>]) -> Result<Vec<f64>, MlError> {
    if model.task != Task::Regress {
        return Err(MlError::InvalidParam("model does not regress"));
    }
    Ok(rows
        .iter()
        .map(|row| {
            let mut sum = 0.0;
            for tree in &model.trees {
                if let TreeNode::LeafReal { mean } = descend(tree, row) {
                    sum += mean;
                }
            }
            sum / model.trees.len() as f64
        })
        .collect())
}
