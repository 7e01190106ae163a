//! Cotton phenology estimation: a fuzzy clustering model over (field, day)
//! elements that emits one- or two-stage metaclasses, ranked-label metrics,
//! and a continuous 100-700 growth scale with per-date regressors.

mod continuous;
mod element;
mod eval;
mod fcm_model;
mod io;

pub use continuous::{
    admissible_stages, predict_continuous, train_stage_regressors, DatedSamples, ReferenceParcel,
    StageRegressors, DEFAULT_SLOPE_STEP, DEFAULT_TRAIN_EVERY, DEFAULT_TW, MIN_DATE_SAMPLES,
};
pub use element::{build_element_space, ElementSpace, RowDropped};
pub use eval::{eval_phenology, PhenoEval, PhenoPrediction};
pub use fcm_model::{
    baseline_doy, ensemble_vote, fit_phenology, metaclass_from_weights, nearest_rank_percentile,
    predict_metaclass, FcmPhenoModel, DOY_COS, DOY_SIN, FCM_CLUSTERS, FCM_FUZZIFIER,
    TH_W_PERCENTILE,
};
pub use io::{read_ground_obs_csv, write_predictions_csv, GroundObservation, ObsReject};

use ml_core::MlError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PhenoError {
    #[error("cluster visit orders have no plurality winner")]
    AmbiguousStageOrder,
    #[error("day {0} falls in no stage window")]
    OutOfSeason(u32),
    #[error("no reference window comparable at day {0}")]
    NoReferenceWindow(u32),
    #[error("nothing to evaluate")]
    EmptyEval,
    #[error("feature {0:?} not present")]
    MissingFeature(String),
    #[error("unknown stage {0:?}")]
    BadStage(String),
    #[error("metaclass index {0} outside 1..=16")]
    BadMetaclassIndex(usize),
    #[error("secondary stage must be adjacent to the primary")]
    NonAdjacentSecondary,
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// The six principal stages in season order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Stage {
    RE,
    LD,
    S,
    F,
    BD,
    BO,
}

pub const STAGES: [Stage; 6] = [Stage::RE, Stage::LD, Stage::S, Stage::F, Stage::BD, Stage::BO];

/// Days of year in which each stage can plausibly occur. Neighboring windows
/// overlap, so a day near a boundary admits both stages.
pub const STAGE_DOY_RANGES: [(Stage, u32, u32); 6] = [
    (Stage::RE, 110, 150),
    (Stage::LD, 130, 190),
    (Stage::S, 160, 215),
    (Stage::F, 180, 250),
    (Stage::BD, 220, 270),
    (Stage::BO, 240, 315),
];

impl Stage {
    /// 1-based position in season order.
    pub fn ordinal(self) -> usize {
        STAGES.iter().position(|&s| s == self).unwrap() + 1
    }

    pub fn from_ordinal(o: usize) -> Option<Stage> {
        STAGES.get(o.checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::RE => "RE",
            Stage::LD => "LD",
            Stage::S => "S",
            Stage::F => "F",
            Stage::BD => "BD",
            Stage::BO => "BO",
        }
    }

    pub fn parse(text: &str) -> Result<Stage, PhenoError> {
        STAGES
            .into_iter()
            .find(|s| s.name().eq_ignore_ascii_case(text.trim()))
            .ok_or_else(|| PhenoError::BadStage(text.to_string()))
    }

    pub fn doy_range(self) -> (u32, u32) {
        let (_, lo, hi) = STAGE_DOY_RANGES[self.ordinal() - 1];
        (lo, hi)
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the 16 admissible one- or two-stage labels. The index runs over
/// the season: unit stage i sits at 3i-2, the ascending pair (i, i+1) at
/// 3i-1 and the descending pair (i+1, i) at 3i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Metaclass {
    primary: Stage,
    secondary: Option<Stage>,
}

impl Metaclass {
    pub fn unit(primary: Stage) -> Metaclass {
        Metaclass { primary, secondary: None }
    }

    pub fn pair(primary: Stage, secondary: Stage) -> Result<Metaclass, PhenoError> {
        let d = primary.ordinal().abs_diff(secondary.ordinal());
        if d != 1 {
            return Err(PhenoError::NonAdjacentSecondary);
        }
        Ok(Metaclass { primary, secondary: Some(secondary) })
    }

    pub fn primary(&self) -> Stage {
        self.primary
    }

    pub fn secondary(&self) -> Option<Stage> {
        self.secondary
    }

    /// 1..=16 position in the season-ordered metaclass list.
    pub fn index(&self) -> usize {
        let i = self.primary.ordinal();
        match self.secondary {
            None => 3 * i - 2,
            Some(s) if s.ordinal() == i + 1 => 3 * i - 1,
            Some(s) => 3 * s.ordinal(),
        }
    }

    pub fn from_index(index: usize) -> Result<Metaclass, PhenoError> {
        if !(1..=16).contains(&index) {
            return Err(PhenoError::BadMetaclassIndex(index));
        }
        let i = (index + 2) / 3; // lower stage ordinal of the triple
        let lower = Stage::from_ordinal(i).unwrap();
        Ok(match index % 3 {
            1 => Metaclass::unit(lower),
            2 => Metaclass::pair(lower, Stage::from_ordinal(i + 1).unwrap())?,
            _ => Metaclass::pair(Stage::from_ordinal(i + 1).unwrap(), lower)?,
        })
    }

    pub fn all() -> Vec<Metaclass> {
        (1..=16).map(|i| Metaclass::from_index(i).unwrap()).collect()
    }
}

impl std::fmt::Display for Metaclass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.secondary {
            None => write!(f, "{}", self.primary),
            Some(s) => write!(f, "{}+{}", self.primary, s),
        }
    }
}

/// Growth position on the continuous scale: hundreds digit is the stage
/// ordinal, the remainder is percent complete. 700 is the harvest boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousStage {
    value: f64,
}

impl ContinuousStage {
    pub fn new(value: f64) -> ContinuousStage {
        assert!(
            (100.0..=700.0).contains(&value),
            "continuous stage {value} outside [100, 700]"
        );
        ContinuousStage { value }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn stage(&self) -> Stage {
        let o = ((self.value / 100.0).floor() as usize).min(6);
        Stage::from_ordinal(o).unwrap()
    }

    /// Fraction of the stage already elapsed, in [0, 1).
    pub fn fraction(&self) -> f64 {
        if self.value >= 700.0 {
            return 1.0;
        }
        (self.value - (self.stage().ordinal() * 100) as f64) / 100.0
    }
}
