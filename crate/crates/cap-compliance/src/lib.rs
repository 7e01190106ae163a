//! CAP decision support: confidence traffic lights over classifier scores,
//! persistence-based smart sampling of suspect parcels, and the Greening-1
//! and SMR-1 rule checks.

mod greening;
mod io;
mod sampling;
mod smr1;

pub use greening::{greening1_by_farmer, greening1_check, Greening1};
pub use io::{read_runs_csv, read_taxonomy_csv, read_waters_geojson, CapReject};
pub use sampling::{
    persistence_threshold, season_filter, smart_sampling, traffic_light, Bands,
    ClassificationRun, ParcelObservation, TrafficLight,
};
pub use smr1::{proximity, smr1_check, Proximity, Risk, Smr1Parcel, DEFAULT_BUFFER_M};

use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CapError {
    #[error("need at least two non-negative class scores")]
    InvalidScores,
    #[error("score bands must satisfy 0 < red < yellow < green")]
    InvalidBands,
    #[error("run count must be at least 1")]
    InvalidCount,
    #[error("parcel {0} missing from a run")]
    MissingParcel(i64),
    #[error("crop areas must be non-negative")]
    InvalidArea,
    #[error("no water geometry to check against")]
    NoWaterData,
    #[error("crop code {0:?} not in the taxonomy")]
    UnknownCrop(String),
    #[error("bad input: {0}")]
    Parse(String),
}

/// Growing season a crop type belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Season {
    Winter,
    Summer,
    YearRound,
}

impl Season {
    pub fn parse(text: &str) -> Result<Season, CapError> {
        match text.trim().to_ascii_lowercase().as_str() {
            "winter" => Ok(Season::Winter),
            "summer" => Ok(Season::Summer),
            "year-round" | "year_round" | "yearround" => Ok(Season::YearRound),
            other => Err(CapError::Parse(format!("unknown season {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Summer => "summer",
            Season::YearRound => "year-round",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CropInfo {
    pub type_name: String,
    pub family: String,
    pub season: Season,
}

/// Crop code lookup; every code seen in runs or declarations must resolve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CropTaxonomy {
    pub crops: BTreeMap<String, CropInfo>,
}

impl CropTaxonomy {
    pub fn season(&self, code: &str) -> Result<Season, CapError> {
        self.crops
            .get(code)
            .map(|c| c.season)
            .ok_or_else(|| CapError::UnknownCrop(code.to_string()))
    }
}
