use std::collections::BTreeMap;

use crate::{
    CapError, ClassificationRun, CropInfo, CropTaxonomy, ParcelObservation, Season,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CapReject {
    pub line: usize,
    pub reason: String,
}

/// Columns: parcel_id, run_day, declared, predicted, score_1..score_k.
/// Rows group into runs by day, days ascending. Bad rows are collected.
pub fn read_runs_csv(
    text: &str,
) -> Result<(Vec<ClassificationRun>, Vec<CapReject>), CapError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CapError::Parse(format!("unreadable header: {e}")))?
        .clone();
    for col in ["parcel_id", "run_day", "declared", "predicted"] {
        if !headers.iter().any(|h| h == col) {
            return Err(CapError::Parse(format!("missing column {col:?}")));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (cid, cday, cdecl, cpred) =
        (col("parcel_id"), col("run_day"), col("declared"), col("predicted"));
    let score_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("score_"))
        .map(|(i, _)| i)
        .collect();
    if score_cols.len() < 2 {
        return Err(CapError::Parse("need at least two score_* columns".to_string()));
    }

    let mut days: BTreeMap<u32, BTreeMap<i64, ParcelObservation>> = BTreeMap::new();
    let mut rejects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let mut reject = |reason: String| rejects.push(CapReject { line, reason });
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                reject(format!("unreadable: {e}"));
                continue;
            }
        };
        let cell = |idx: usize| record.get(idx).unwrap_or("").trim();
        let parcel = match cell(cid).parse::<i64>() {
            Ok(v) => v,
            Err(_) => {
                reject(format!("bad parcel_id {:?}", cell(cid)));
                continue;
            }
        };
        let day = match cell(cday).parse::<u32>() {
            Ok(v) => v,
            Err(_) => {
                reject(format!("bad run_day {:?}", cell(cday)));
                continue;
            }
        };
        let declared = cell(cdecl).to_string();
        let predicted = cell(cpred).to_string();
        if declared.is_empty() || predicted.is_empty() {
            reject("empty crop code".to_string());
            continue;
        }
        let mut scores = Vec::with_capacity(score_cols.len());
        let mut ok = true;
        for &sc in &score_cols {
            match cell(sc).parse::<f64>() {
                Ok(v) if v >= 0.0 => scores.push(v),
                _ => {
                    reject(format!("bad score {:?}", cell(sc)));
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let run = days.entry(day).or_default();
        if run.contains_key(&parcel) {
            reject(format!("duplicate parcel {parcel} in run day {day}"));
            continue;
        }
        run.insert(parcel, ParcelObservation { declared, predicted, scores });
    }
    let runs = days
        .into_iter()
        .map(|(run_day, parcels)| ClassificationRun { run_day, parcels })
        .collect();
    Ok((runs, rejects))
}

/// Columns: crop_code, type_name, family, season.
pub fn read_taxonomy_csv(text: &str) -> Result<(CropTaxonomy, Vec<CapReject>), CapError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CapError::Parse(format!("unreadable header: {e}")))?
        .clone();
    for col in ["crop_code", "type_name", "family", "season"] {
        if !headers.iter().any(|h| h == col) {
            return Err(CapError::Parse(format!("missing column {col:?}")));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (cc, ct, cf, cs) = (col("crop_code"), col("type_name"), col("family"), col("season"));

    let mut taxonomy = CropTaxonomy::default();
    let mut rejects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let mut reject = |reason: String| rejects.push(CapReject { line, reason });
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                reject(format!("unreadable: {e}"));
                continue;
            }
        };
        let cell = |idx: usize| record.get(idx).unwrap_or("").trim();
        let code = cell(cc).to_string();
        if code.is_empty() {
            reject("empty crop_code".to_string());
            continue;
        }
        let season = match Season::parse(cell(cs)) {
            Ok(s) => s,
            Err(_) => {
                reject(format!("bad season {:?}", cell(cs)));
                continue;
            }
        };
        if taxonomy.crops.contains_key(&code) {
            reject(format!("duplicate crop_code {code:?}"));
            continue;
        }
        taxonomy.crops.insert(
            code,
            CropInfo {
                type_name: cell(ct).to_string(),
                family: cell(cf).to_string(),
                season,
            },
        );
    }
    Ok((taxonomy, rejects))
}

fn coord(v: &serde_json::Value) -> Result<(f64, f64), CapError> {
    let arr = v.as_array().filter(|a| a.len() >= 2);
    let xy = arr
        .and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)))
        .ok_or_else(|| CapError::Parse(format!("bad coordinate {v}")))?;
    Ok(xy)
}

fn chain(v: &serde_json::Value) -> Result<Vec<(f64, f64)>, CapError> {
    v.as_array()
        .ok_or_else(|| CapError::Parse("coordinates not an array".to_string()))?
        .iter()
        .map(coord)
        .collect()
}

fn push_geometry(
    geom: &serde_json::Value,
    out: &mut Vec<Vec<(f64, f64)>>,
) -> Result<(), CapError> {
    let gtype = geom
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| CapError::Parse("geometry without type".to_string()))?;
    let coords = geom
        .get("coordinates")
        .ok_or_else(|| CapError::Parse(format!("{gtype} without coordinates")))?;
    let arr =
        coords.as_array().ok_or_else(|| CapError::Parse("coordinates not an array".to_string()))?;
    match gtype {
        "LineString" => out.push(chain(coords)?),
        "Polygon" | "MultiLineString" => {
            for part in arr {
                out.push(chain(part)?);
            }
        }
        "MultiPolygon" => {
            for poly in arr {
                let rings = poly
                    .as_array()
                    .ok_or_else(|| CapError::Parse("bad MultiPolygon".to_string()))?;
                for ring in rings {
                    out.push(chain(ring)?);
                }
            }
        }
        other => return Err(CapError::Parse(format!("unsupported geometry {other:?}"))),
    }
    Ok(())
}

/// Water geometries as vertex chains. Polygon rings arrive closed from
/// GeoJSON, so every chain is just consecutive segments.
pub fn read_waters_geojson(text: &str) -> Result<Vec<Vec<(f64, f64)>>, CapError> {
    let root: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CapError::Parse(format!("bad GeoJSON: {e}")))?;
    let mut out = Vec::new();
    match root.get("type").and_then(|t| t.as_str()) {
        Some("FeatureCollection") => {
            let features = root
                .get("features")
                .and_then(|f| f.as_array())
                .ok_or_else(|| CapError::Parse("FeatureCollection without features".to_string()))?;
            for f in features {
                let geom = f
                    .get("geometry")
                    .filter(|g| !g.is_null())
                    .ok_or_else(|| CapError::Parse("feature without geometry".to_string()))?;
                push_geometry(geom, &mut out)?;
            }
        }
        Some("Feature") => {
            let geom = root
                .get("geometry")
                .filter(|g| !g.is_null())
                .ok_or_else(|| CapError::Parse("feature without geometry".to_string()))?;
            push_geometry(geom, &mut out)?;
        }
        Some(_) => push_geometry(&root, &mut out)?,
        None => return Err(CapError::Parse("GeoJSON without type".to_string())),
    }
    Ok(out)
}
