use std::collections::{BTreeMap, BTreeSet};

use crate::{CapError, CropTaxonomy};

/// Gap cutoffs for the confidence bands. Only the green threshold comes from
/// the source method; the yellow and red cutoffs are this crate's defaults
/// and should be treated as configuration, not doctrine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bands {
    pub green: f64,
    pub yellow: f64,
    pub red: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Bands { green: 0.5, yellow: 0.3, red: 0.15 }
    }
}

impl Bands {
    pub fn new(green: f64, yellow: f64, red: f64) -> Result<Bands, CapError> {
        if !(red > 0.0 && yellow > red && green > yellow) {
            return Err(CapError::InvalidBands);
        }
        Ok(Bands { green, yellow, red })
    }
}

/// Confidence band of one classification decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficLight {
    Green,
    Yellow,
    Red,
    Unreliable,
}

impl TrafficLight {
    pub fn name(self) -> &'static str {
        match self {
            TrafficLight::Green => "green",
            TrafficLight::Yellow => "yellow",
            TrafficLight::Red => "red",
            TrafficLight::Unreliable => "unreliable",
        }
    }
}

/// Band the decision by the gap between the two highest class scores.
pub fn traffic_light(scores: &[f64], bands: &Bands) -> Result<TrafficLight, CapError> {
    if scores.len() < 2 || scores.iter().any(|s| !(*s >= 0.0)) {
        return Err(CapError::InvalidScores);
    }
    let mut top1 = f64::NEG_INFINITY;
    let mut top2 = f64::NEG_INFINITY;
    for &s in scores {
        if s > top1 {
            top2 = top1;
            top1 = s;
        } else if s > top2 {
            top2 = s;
        }
    }
    let gap = top1 - top2;
    Ok(if gap >= bands.green {
        TrafficLight::Green
    } else if gap >= bands.yellow {
        TrafficLight::Yellow
    } else if gap >= bands.red {
        TrafficLight::Red
    } else {
        TrafficLight::Unreliable
    })
}

/// Misclassification count a parcel must reach before it is sampled. Grows
/// with the number of runs seen so far and saturates at 5.
pub fn persistence_threshold(run_count: usize) -> Result<usize, CapError> {
    if run_count < 1 {
        return Err(CapError::InvalidCount);
    }
    let t = match run_count {
        1 => 0,
        n if n % 2 == 1 => (n + 1) / 2 - 1,
        n => n / 2,
    };
    Ok(t.min(5))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParcelObservation {
    pub declared: String,
    pub predicted: String,
    pub scores: Vec<f64>,
}

/// One classification pass over every monitored parcel.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRun {
    pub run_day: u32,
    pub parcels: BTreeMap<i64, ParcelObservation>,
}

/// Parcels whose confident (green) mismatches persist across runs. Only
/// green-band disagreements count; the alarm fires once the count reaches
/// the persistence threshold for the number of runs.
pub fn smart_sampling(
    runs: &[ClassificationRun],
    bands: &Bands,
) -> Result<BTreeSet<i64>, CapError> {
    if runs.is_empty() {
        return Err(CapError::InvalidCount);
    }
    let ids: BTreeSet<i64> = runs.iter().flat_map(|r| r.parcels.keys().copied()).collect();
    let mut mis: BTreeMap<i64, usize> = ids.iter().map(|&id| (id, 0)).collect();
    for run in runs {
        for &id in &ids {
            let obs = run.parcels.get(&id).ok_or(CapError::MissingParcel(id))?;
            if traffic_light(&obs.scores, bands)? == TrafficLight::Green
                && obs.predicted != obs.declared
            {
                *mis.get_mut(&id).unwrap() += 1;
            }
        }
    }
    let threshold = persistence_threshold(runs.len())?;
    Ok(ids
        .into_iter()
        .filter(|id| {
            let m = mis[id];
            m >= threshold && m > 0
        })
        .collect())
}

/// Keep an alarm only when the latest prediction sits in a different growing
/// season than the declaration; same-season confusions are let through.
pub fn season_filter(
    alarms: &BTreeSet<i64>,
    latest: &ClassificationRun,
    taxonomy: &CropTaxonomy,
) -> Result<BTreeSet<i64>, CapError> {
    let mut kept = BTreeSet::new();
    for &id in alarms {
        let obs = latest.parcels.get(&id).ok_or(CapError::MissingParcel(id))?;
        if taxonomy.season(&obs.predicted)? != taxonomy.season(&obs.declared)? {
            kept.insert(id);
        }
    }
    Ok(kept)
}
