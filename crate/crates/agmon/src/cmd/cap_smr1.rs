use std::path::{Path, PathBuf};

use clap::Args;
use cap_compliance::{proximity, read_waters_geojson, smr1_check, Smr1Parcel, DEFAULT_BUFFER_M};
use serde_json::{json, Value};

use super::csv_quote;
use crate::config::RunConfig;
use crate::error::{config_err, data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct CapSmr1Args {
    /// Parcel GeoJSON; properties need id, slope_deg, aspect_deg
    #[arg(long)]
    pub parcels: PathBuf,
    /// Watercourse GeoJSON (LineString/Polygon features)
    #[arg(long)]
    pub waters: PathBuf,
    /// Buffer distance in metres
    #[arg(long)]
    pub buffer: Option<f64>,
}

fn ring_coords(value: &Value) -> Option<Vec<(f64, f64)>> {
    let arr = value.as_array()?;
    let mut ring = Vec::with_capacity(arr.len());
    for pt in arr {
        let pt = pt.as_array()?;
        ring.push((pt.first()?.as_f64()?, pt.get(1)?.as_f64()?));
    }
    Some(ring)
}

fn polygon_rings(geometry: &Value) -> Option<Vec<Vec<(f64, f64)>>> {
    let mut rings = Vec::new();
    match geometry.get("type")?.as_str()? {
        "Polygon" => {
            for ring in geometry.get("coordinates")?.as_array()? {
                rings.push(ring_coords(ring)?);
            }
        }
        "MultiPolygon" => {
            for poly in geometry.get("coordinates")?.as_array()? {
                for ring in poly.as_array()? {
                    rings.push(ring_coords(ring)?);
                }
            }
        }
        _ => return None,
    }
    Some(rings)
}

fn parse_parcel(feature: &Value) -> Option<(String, Smr1Parcel)> {
    let props = feature.get("properties")?;
    let id = match props.get("id")? {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return None,
    };
    let slope_deg = props.get("slope_deg")?.as_f64()?;
    let aspect_deg = props.get("aspect_deg")?.as_f64()?;
    let rings = polygon_rings(feature.get("geometry")?)?;
    if rings.iter().any(|r| r.len() < 3) {
        return None;
    }
    Some((id, Smr1Parcel { rings, slope_deg, aspect_deg }))
}

pub fn run(args: &CapSmr1Args, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let buffer = cfg.resolve(args.buffer, "cap-smr1", "buffer", DEFAULT_BUFFER_M)?;
    if !buffer.is_finite() || buffer <= 0.0 || buffer > 10_000.0 {
        return Err(config_err(format!("buffer = {buffer} outside (0, 10000]")));
    }

    let mut ctx = RunContext::new("cap-smr1", out_dir)?;
    ctx.setting("buffer", buffer);

    let parcels_text = ctx.input_text(&args.parcels)?;
    let root: Value = serde_json::from_str(&parcels_text)
        .map_err(|e| data_err(format!("parcels GeoJSON: {e}")))?;
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| data_err("parcels GeoJSON: expected a FeatureCollection"))?;

    let waters_text = ctx.input_text(&args.waters)?;
    let waters = read_waters_geojson(&waters_text)?;

    let mut rejects: Vec<(usize, String)> = Vec::new();
    let mut rows = String::from("id,risk,distance_m,bearing_deg\n");
    let mut out_features = Vec::new();
    let mut high = 0usize;
    let mut checked = 0usize;
    for (i, feature) in features.iter().enumerate() {
        let Some((id, parcel)) = parse_parcel(feature) else {
            rejects.push((i, "missing id/slope_deg/aspect_deg or bad polygon".into()));
            continue;
        };
        let risk = match smr1_check(&parcel, &waters, buffer) {
            Ok(r) => r,
            Err(e) => return Err(e.into()),
        };
        let prox = proximity(&parcel.rings, &waters)
            .ok_or_else(|| data_err(format!("parcel {id}: no boundary segments to measure")))?;
        checked += 1;
        if risk.name() == "high" {
            high += 1;
        }
        rows.push_str(&format!(
            "{},{},{},{}\n",
            csv_quote(&id),
            risk.name(),
            prox.distance,
            prox.bearing_deg
        ));
        let mut feature = feature.clone();
        if let Some(props) = feature.get_mut("properties").and_then(Value::as_object_mut) {
            props.insert("risk".into(), json!(risk.name()));
            props.insert("distance_m".into(), json!(prox.distance));
            props.insert("bearing_deg".into(), json!(prox.bearing_deg));
        }
        out_features.push(feature);
    }
    ctx.write("smr1.csv", &rows)?;
    let collection = json!({"type": "FeatureCollection", "features": out_features});
    ctx.write("smr1.geojson", &format!("{collection:#}\n"))?;

    let mut rej = String::from("feature,reason\n");
    for (i, reason) in &rejects {
        rej.push_str(&format!("{i},{}\n", csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "cap-smr1: {} parcels checked, {} high risk, {} rejects, buffer {buffer} m",
        checked, high, rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
