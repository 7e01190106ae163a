//! Clustering, random forests, ReliefF and agreement metrics. Every fit takes
//! an explicit seed; parallel and serial paths produce identical models.

mod fcm;
mod forest;
mod kmeans;
mod metrics;
mod model_io;
mod relieff;

pub use fcm::{fcm_fit, fcm_membership, FcmFit, FcmModel};
pub use forest::{
    rf_fit, rf_predict_class, rf_predict_real, RandomForestModel, Task, Tree, TreeNode,
    DEFAULT_MAX_DEPTH, DEFAULT_N_TREES,
};
pub use kmeans::{kmeans_fit, KMeansModel};
pub use metrics::{
    classification_metrics, krippendorff_alpha_ordinal, mcnemar, ClassMetrics, ConfusionMatrix,
};
pub use model_io::{forest_from_json, forest_to_json};
pub use relieff::{relieff, DEFAULT_RELIEFF_K};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MlError {
    #[error("k exceeds the number of samples")]
    TooManyClusters,
    #[error("fuzzifier must exceed 1")]
    InvalidFuzzifier,
    #[error("empty dataset")]
    EmptyData,
    #[error("k_neighbors must be below every class count")]
    KTooLarge,
    #[error("mcnemar undefined for n_ab + n_ba = 0")]
    McNemarUndefined,
    #[error("no pairable ratings")]
    NoPairableRatings,
    #[error("{0}")]
    InvalidParam(&'static str),
    #[error("model file: {0}")]
    BadModelFile(String),
}

/// Feature matrix with optional labels. Rows are samples; no NaN anywhere.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub labels: Labels,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    None,
    Class(Vec<usize>),
    Real(Vec<f64>),
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, labels: Labels, feature_names: Vec<String>) -> Self {
        let n = x.len();
        if let Some(first) = x.first() {
            let d = first.len();
            assert!(x.iter().all(|row| row.len() == d), "ragged feature matrix");
            assert_eq!(feature_names.len(), d, "feature name count");
            assert!(x.iter().all(|row| row.iter().all(|v| v.is_finite())), "non-finite feature");
        }
        match &labels {
            Labels::None => {}
            Labels::Class(y) => assert_eq!(y.len(), n, "label count"),
            Labels::Real(y) => assert_eq!(y.len(), n, "label count"),
        }
        Dataset { x, labels, feature_names }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

/// One-step mix used to derive independent per-tree / per-k seeds.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
