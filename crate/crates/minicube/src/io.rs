use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::cube::{Cube, GridSpec};
use crate::parcels::{Parcel, ParcelSet};
use crate::CubeError;

/// A skipped input row/feature and why. Ingest keeps going; callers decide
/// whether a non-empty reject list is fatal.
#[derive(Debug, Clone)]
pub struct RejectedRow {
    pub index: usize,
    pub reason: String,
}

fn json_f64(v: &Value, key: &str) -> Result<f64, CubeError> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| CubeError::Parse(format!("header field `{key}` missing or not a number")))
}

fn json_usize(v: &Value, key: &str) -> Result<usize, CubeError> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| CubeError::Parse(format!("header field `{key}` missing or not an integer")))
}

/// Directory layout: `header.json` plus one `<date>_<variable>.csv` grid per
/// slice, `height` rows of `width` cells, empty cell = missing.
pub fn read_cube_dir(dir: &Path) -> Result<Cube, CubeError> {
    let header_text = fs::read_to_string(dir.join("header.json"))?;
    let header: Value =
        serde_json::from_str(&header_text).map_err(|e| CubeError::Parse(format!("header.json: {e}")))?;
    let grid = GridSpec::new(
        json_f64(&header, "origin_x")?,
        json_f64(&header, "origin_y")?,
        json_f64(&header, "pixel_size")?,
        json_usize(&header, "width")?,
        json_usize(&header, "height")?,
    )?;
    let dates: Vec<u32> = header
        .get("dates")
        .and_then(Value::as_array)
        .ok_or_else(|| CubeError::Parse("header `dates` missing".into()))?
        .iter()
        .map(|d| {
            d.as_u64().map(|x| x as u32).ok_or_else(|| CubeError::Parse("non-integer date".into()))
        })
        .collect::<Result<_, _>>()?;
    let variables: Vec<String> = header
        .get("variables")
        .and_then(Value::as_array)
        .ok_or_else(|| CubeError::Parse("header `variables` missing".into()))?
        .iter()
        .map(|v| {
            v.as_str().map(str::to_owned).ok_or_else(|| CubeError::Parse("non-string variable".into()))
        })
        .collect::<Result<_, _>>()?;

    let mut values = Vec::with_capacity(dates.len() * variables.len() * grid.len());
    for &date in &dates {
        for var in &variables {
            let path = dir.join(format!("{date}_{var}.csv"));
            let text = fs::read_to_string(&path)
                .map_err(|e| CubeError::Parse(format!("{}: {e}", path.display())))?;
            let mut cells = 0usize;
            for (row_no, line) in text.lines().enumerate() {
                if row_no >= grid.height {
                    return Err(CubeError::Parse(format!("{}: too many rows", path.display())));
                }
                let row: Vec<&str> = line.split(',').collect();
                if row.len() != grid.width {
                    return Err(CubeError::Parse(format!(
                        "{}: row {} has {} cells, want {}",
                        path.display(),
                        row_no,
                        row.len(),
                        grid.width
                    )));
                }
                for cell in row {
                    let trimmed = cell.trim();
                    if trimmed.is_empty() {
                        values.push(f64::NAN);
                    } else {
                        values.push(trimmed.parse::<f64>().map_err(|_| {
                            CubeError::Parse(format!("{}: bad cell `{trimmed}`", path.display()))
                        })?);
                    }
                    cells += 1;
                }
            }
            if cells != grid.len() {
                return Err(CubeError::Parse(format!("{}: {} cells, want {}", path.display(), cells, grid.len())));
            }
        }
    }
    Cube::new(grid, dates, variables, values)
}

pub fn write_cube_dir(cube: &Cube, dir: &Path) -> Result<(), CubeError> {
    fs::create_dir_all(dir)?;
    let header = serde_json::json!({
        "origin_x": cube.grid.origin_x,
        "origin_y": cube.grid.origin_y,
        "pixel_size": cube.grid.pixel_size,
        "width": cube.grid.width,
        "height": cube.grid.height,
        "dates": cube.dates,
        "variables": cube.variables,
    });
    fs::write(dir.join("header.json"), serde_json::to_string_pretty(&header).unwrap())?;
    for (t, &date) in cube.dates.iter().enumerate() {
        for (v, var) in cube.variables.iter().enumerate() {
            let slice = cube.slice(t, v);
            let mut text = String::new();
            for row in 0..cube.grid.height {
                for col in 0..cube.grid.width {
                    if col > 0 {
                        text.push(',');
                    }
                    let x = slice[row * cube.grid.width + col];
                    if !x.is_nan() {
                        text.push_str(&format!("{x}"));
                    }
                }
                text.push('\n');
            }
            fs::write(dir.join(format!("{date}_{var}.csv")), text)?;
        }
    }
    Ok(())
}

fn ring_from_json(coords: &Value) -> Option<Vec<(f64, f64)>> {
    let arr = coords.as_array()?;
    let mut ring = Vec::with_capacity(arr.len());
    for pt in arr {
        let pt = pt.as_array()?;
        ring.push((pt.first()?.as_f64()?, pt.get(1)?.as_f64()?));
    }
    Some(ring)
}

fn rings_from_geometry(geom: &Value) -> Option<Vec<Vec<(f64, f64)>>> {
    let coords = geom.get("coordinates")?;
    match geom.get("type")?.as_str()? {
        "Polygon" => coords.as_array()?.iter().map(ring_from_json).collect(),
        "MultiPolygon" => {
            let mut rings = Vec::new();
            for poly in coords.as_array()? {
                for ring in poly.as_array()? {
                    rings.push(ring_from_json(ring)?);
                }
            }
            Some(rings)
        }
        _ => None,
    }
}

/// FeatureCollection with properties `id`, `crop_code`, `farmer_id` and an
/// optional `area_ha` (computed from the polygon when absent). Bad features
/// land in the reject list, duplicates included, with the winning row noted.
pub fn read_parcels_geojson(text: &str) -> Result<(ParcelSet, Vec<RejectedRow>), CubeError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CubeError::Parse(format!("geojson: {e}")))?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| CubeError::Parse("geojson: no features array".into()))?;

    let mut set: ParcelSet = BTreeMap::new();
    let mut first_index: BTreeMap<i64, usize> = BTreeMap::new();
    let mut rejects = Vec::new();
    for (i, feat) in features.iter().enumerate() {
        let reject = |reason: String, rejects: &mut Vec<RejectedRow>| {
            rejects.push(RejectedRow { index: i, reason });
        };
        let props = match feat.get("properties") {
            Some(p) if p.is_object() => p,
            _ => {
                reject("no properties".into(), &mut rejects);
                continue;
            }
        };
        let id = match props.get("id").and_then(Value::as_i64) {
            Some(id) if id >= 0 => id,
            _ => {
                reject("missing or negative `id`".into(), &mut rejects);
                continue;
            }
        };
        if let Some(&first) = first_index.get(&id) {
            reject(format!("duplicate id {id} (first at feature {first})"), &mut rejects);
            continue;
        }
        let rings = match feat.get("geometry").and_then(rings_from_geometry) {
            Some(r) => r,
            None => {
                reject(format!("id {id}: geometry not Polygon/MultiPolygon"), &mut rejects);
                continue;
            }
        };
        let crop_code = props.get("crop_code").and_then(Value::as_str).unwrap_or("").to_owned();
        let farmer_id = props.get("farmer_id").and_then(Value::as_str).unwrap_or("").to_owned();
        let area_ha = props
            .get("area_ha")
            .and_then(Value::as_f64)
            .unwrap_or_else(|| Parcel::polygon_area_ha(&rings));
        first_index.insert(id, i);
        set.insert(id, Parcel { rings, crop_code, farmer_id, area_ha });
    }
    Ok((set, rejects))
}
