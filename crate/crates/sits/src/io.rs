use std::collections::BTreeMap;

use crate::{SitsError, TimeSeries};

/// Skipped CSV line (1-based, header = line 1) and why.
#[derive(Debug, Clone)]
pub struct Reject {
    pub line: usize,
    pub reason: String,
}

pub type SeriesKey = (i64, String);

/// Columns: parcel_id, day, variable, value; empty value = null. Rows may
/// arrive in any order; duplicate (parcel, variable, day) rows are rejected.
pub fn read_timeseries_csv(
    text: &str,
) -> Result<(BTreeMap<SeriesKey, TimeSeries>, Vec<Reject>), SitsError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|_| SitsError::InsufficientData)?.clone();
    let want = ["parcel_id", "day", "variable", "value"];
    for col in want {
        if !headers.iter().any(|h| h == col) {
            return Err(SitsError::InsufficientData);
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (ci, cd, cv, cval) = (col("parcel_id"), col("day"), col("variable"), col("value"));

    let mut rows: BTreeMap<SeriesKey, BTreeMap<u32, Option<f64>>> = BTreeMap::new();
    let mut rejects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejects.push(Reject { line, reason: format!("unreadable: {e}") });
                continue;
            }
        };
        let parcel = match record.get(ci).and_then(|s| s.trim().parse::<i64>().ok()) {
            Some(p) => p,
            None => {
                rejects.push(Reject { line, reason: "bad parcel_id".into() });
                continue;
            }
        };
        let day = match record.get(cd).and_then(|s| s.trim().parse::<u32>().ok()) {
            Some(d) => d,
            None => {
                rejects.push(Reject { line, reason: "bad day".into() });
                continue;
            }
        };
        let variable = match record.get(cv) {
            Some(v) if !v.trim().is_empty() => v.trim().to_owned(),
            _ => {
                rejects.push(Reject { line, reason: "bad variable".into() });
                continue;
            }
        };
        let raw = record.get(cval).unwrap_or("").trim();
        let value = if raw.is_empty() {
            None
        } else {
            match raw.parse::<f64>() {
                Ok(v) => Some(v),
                Err(_) => {
                    rejects.push(Reject { line, reason: format!("bad value `{raw}`") });
                    continue;
                }
            }
        };
        let series = rows.entry((parcel, variable)).or_default();
        if series.contains_key(&day) {
            rejects.push(Reject { line, reason: format!("duplicate day {day}") });
            continue;
        }
        series.insert(day, value);
    }
    let out = rows
        .into_iter()
        .map(|(k, days)| (k, TimeSeries { points: days.into_iter().collect() }))
        .collect();
    Ok((out, rejects))
}

pub fn write_timeseries_csv(series: &BTreeMap<SeriesKey, TimeSeries>) -> String {
    let mut out = String::from("parcel_id,day,variable,value\n");
    for ((parcel, variable), ts) in series {
        for &(day, value) in &ts.points {
            match value {
                Some(v) => out.push_str(&format!("{parcel},{day},{variable},{v}\n")),
                None => out.push_str(&format!("{parcel},{day},{variable},\n")),
            }
        }
    }
    out
}
