use crate::IndexError;

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherDaily {
    pub day: u32,
    pub tmin: f64,
    pub tmax: f64,
    pub precip: f64,
    pub radiation: f64,
    pub soil_t: f64,
    pub soil_m: f64,
    pub rh: f64,
    pub wind: f64,
}

/// Columns: day, tmin, tmax, precip, radiation, soil_t, soil_m, rh, wind.
pub fn read_weather_csv(text: &str) -> Result<Vec<WeatherDaily>, IndexError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| IndexError::Parse(e.to_string()))?.clone();
    let want = ["day", "tmin", "tmax", "precip", "radiation", "soil_t", "soil_m", "rh", "wind"];
    let mut cols = Vec::with_capacity(want.len());
    for name in want {
        cols.push(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IndexError::Parse(format!("missing column `{name}`")))?,
        );
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IndexError::Parse(format!("line {}: {e}", i + 2)))?;
        let get = |c: usize| -> Result<f64, IndexError> {
            record
                .get(cols[c])
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| IndexError::Parse(format!("line {}: bad `{}`", i + 2, want[c])))
        };
        let row = WeatherDaily {
            day: get(0)? as u32,
            tmin: get(1)?,
            tmax: get(2)?,
            precip: get(3)?,
            radiation: get(4)?,
            soil_t: get(5)?,
            soil_m: get(6)?,
            rh: get(7)?,
            wind: get(8)?,
        };
        if row.tmax < row.tmin {
            return Err(IndexError::Parse(format!("line {}: tmax below tmin", i + 2)));
        }
        out.push(row);
    }
    Ok(out)
}
