//! Vegetation indices from band reflectances, growing degree days from
//! temperature extremes.

mod weather;

pub use weather::{read_weather_csv, WeatherDaily};

use std::collections::BTreeMap;

pub type SpectralSample = BTreeMap<String, f64>;

pub const INDEX_NAMES: &[&str] = &[
    "ndvi", "ndwi", "ndmi", "psri", "savi", "evi", "varigreen", "gari", "sipi", "wdrvi", "gvmi",
    "gi", "gcvi",
];

pub const DEFAULT_T_BASE: f64 = 15.6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IndexError {
    #[error("unknown index `{0}`")]
    UnknownIndex(String),
    #[error("missing band {0}")]
    MissingBand(&'static str),
    #[error("tmax below tmin")]
    InvalidTemps,
    #[error("weather csv: {0}")]
    Parse(String),
}

fn band(s: &SpectralSample, name: &'static str) -> Result<f64, IndexError> {
    s.get(name).copied().ok_or(IndexError::MissingBand(name))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Index value for a named formula; `Ok(None)` when the denominator vanishes,
/// so one degenerate pixel cannot poison a cube pass. Names are matched
/// case-insensitively.
pub fn compute_index(name: &str, s: &SpectralSample) -> Result<Option<f64>, IndexError> {
    let value = match name.to_ascii_lowercase().as_str() {
        "ndvi" => {
            let (b08, b04) = (band(s, "B08")?, band(s, "B04")?);
            ratio(b08 - b04, b08 + b04)
        }
        "ndwi" => {
            let (b03, b08) = (band(s, "B03")?, band(s, "B08")?);
            ratio(b03 - b08, b08 + b03)
        }
        "ndmi" => {
            let (b08, b11) = (band(s, "B08")?, band(s, "B11")?);
            ratio(b08 - b11, b08 + b11)
        }
        "psri" => {
            let (b04, b02, b06) = (band(s, "B04")?, band(s, "B02")?, band(s, "B06")?);
            ratio(b04 - b02, b06)
        }
        "savi" => {
            let (b08, b04) = (band(s, "B08")?, band(s, "B04")?);
            ratio(b08 - b04, b08 + b04 + 0.428).map(|r| r * 1.428)
        }
        "evi" => {
            let (b08, b04, b02) = (band(s, "B08")?, band(s, "B04")?, band(s, "B02")?);
            ratio(2.5 * (b08 - b04), b08 + 6.0 * b04 - 7.5 * b02 + 1.0)
        }
        "varigreen" => {
            let (b03, b04, b02) = (band(s, "B03")?, band(s, "B04")?, band(s, "B02")?);
            ratio(b03 - b04, b03 + b04 - b02)
        }
        "gari" => {
            let (b08, b03, b02, b04) =
                (band(s, "B08")?, band(s, "B03")?, band(s, "B02")?, band(s, "B04")?);
            ratio(b08 - (b03 - (b02 - b04)), b08 - (b03 + (b02 - b04)))
        }
        "sipi" => {
            let (b08, b02, b04) = (band(s, "B08")?, band(s, "B02")?, band(s, "B04")?);
            ratio(b08 - b02, b08 - b04)
        }
        "wdrvi" => {
            let (b08, b04) = (band(s, "B08")?, band(s, "B04")?);
            ratio(0.2 * b08 - b04, 0.2 * b08 + b04)
        }
        "gvmi" => {
            let (b08, b12) = (band(s, "B08")?, band(s, "B12")?);
            ratio((b08 + 0.1) - (b12 + 0.02), (b08 + 0.1) + (b12 + 0.02))
        }
        "gi" => {
            let (b03, b04) = (band(s, "B03")?, band(s, "B04")?);
            ratio(b03, b04)
        }
        "gcvi" => {
            let (b08, b03) = (band(s, "B08")?, band(s, "B03")?);
            ratio(b08, b03).map(|r| r - 1.0)
        }
        other => return Err(IndexError::UnknownIndex(other.to_owned())),
    };
    Ok(value)
}

/// Growing degree days above `tbase`, clamped at zero.
pub fn gdd(tmax: f64, tmin: f64, tbase: f64) -> Result<f64, IndexError> {
    if tmax < tmin {
        return Err(IndexError::InvalidTemps);
    }
    Ok(((tmax + tmin) / 2.0 - tbase).max(0.0))
}
