use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use indices::{compute_index, gdd, read_weather_csv, SpectralSample, DEFAULT_T_BASE, INDEX_NAMES};
use sits::{write_timeseries_csv, SeriesKey, TimeSeries};

use super::csv_quote;
use crate::config::{check_range, RunConfig};
use crate::error::{config_err, data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct IndicesArgs {
    /// Wide band CSV: parcel_id, day, then one column per band (B02..B12)
    #[arg(long)]
    pub bands: PathBuf,
    /// Daily weather CSV; adds gdd.csv to the outputs
    #[arg(long)]
    pub weather: Option<PathBuf>,
    /// Comma-separated index names (default: all)
    #[arg(long)]
    pub indices: Option<String>,
    /// GDD base temperature, deg C
    #[arg(long)]
    pub tbase: Option<f64>,
}

pub fn run(args: &IndicesArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let list = cfg.resolve(args.indices.clone(), "indices", "indices", INDEX_NAMES.join(","))?;
    let mut wanted = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let lower = name.to_ascii_lowercase();
        if !INDEX_NAMES.contains(&lower.as_str()) {
            return Err(config_err(format!("unknown index `{name}`")));
        }
        wanted.push(lower);
    }
    if wanted.is_empty() {
        return Err(config_err("no indices requested"));
    }
    let tbase = cfg.resolve(args.tbase, "indices", "tbase", DEFAULT_T_BASE)?;
    check_range("tbase", tbase, -50.0, 50.0)?;

    let mut ctx = RunContext::new("indices", out_dir)?;
    ctx.setting("indices", wanted.join(","));
    ctx.setting("tbase", tbase);

    let text = ctx.input_text(&args.bands)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| data_err(format!("bands header: {e}")))?.clone();
    let idx = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ci), Some(cd)) = (idx("parcel_id"), idx("day")) else {
        return Err(data_err("bands csv must have parcel_id and day columns"));
    };
    let band_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ci && *i != cd)
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut out: BTreeMap<SeriesKey, BTreeMap<u32, Option<f64>>> = BTreeMap::new();
    let mut rejects: Vec<(usize, String)> = Vec::new();
    let mut samples = 0usize;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejects.push((line, format!("unreadable: {e}")));
                continue;
            }
        };
        let parcel: i64 = match record.get(ci).unwrap_or("").trim().parse() {
            Ok(p) => p,
            Err(_) => {
                rejects.push((line, "bad parcel_id".into()));
                continue;
            }
        };
        let day: u32 = match record.get(cd).unwrap_or("").trim().parse() {
            Ok(d) => d,
            Err(_) => {
                rejects.push((line, "bad day".into()));
                continue;
            }
        };
        let mut sample = SpectralSample::new();
        let mut bad_cell = None;
        for (col, band) in &band_cols {
            let cell = record.get(*col).unwrap_or("").trim();
            if cell.is_empty() {
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    sample.insert(band.clone(), v);
                }
                _ => {
                    bad_cell = Some(band.clone());
                    break;
                }
            }
        }
        if let Some(band) = bad_cell {
            rejects.push((line, format!("bad value in {band}")));
            continue;
        }
        samples += 1;
        for name in &wanted {
            match compute_index(name, &sample) {
                Ok(value) => {
                    let prev = out
                        .entry((parcel, name.clone()))
                        .or_default()
                        .insert(day, value);
                    if prev.is_some() {
                        rejects.push((line, format!("duplicate (parcel, day) for {name}")));
                    }
                }
                Err(e) => rejects.push((line, format!("{name}: {e}"))),
            }
        }
    }

    let series: BTreeMap<SeriesKey, TimeSeries> = out
        .into_iter()
        .map(|(k, days)| (k, TimeSeries::new(days.into_iter().collect())))
        .collect();
    ctx.write("indices.csv", &write_timeseries_csv(&series))?;

    let mut gdd_rows = 0usize;
    if let Some(weather_path) = &args.weather {
        let wtext = ctx.input_text(weather_path)?;
        let weather = read_weather_csv(&wtext)?;
        let mut gout = String::from("day,gdd,agdd\n");
        let mut agdd = 0.0;
        for w in &weather {
            let g = gdd(w.tmax, w.tmin, tbase)?;
            agdd += g;
            gout.push_str(&format!("{},{g},{agdd}\n", w.day));
            gdd_rows += 1;
        }
        ctx.write("gdd.csv", &gout)?;
    }

    let mut rej = String::from("line,reason\n");
    for (line, reason) in &rejects {
        rej.push_str(&format!("{line},{}\n", csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "indices: {} samples, {} series ({}), {} rejects, {} gdd rows",
        samples,
        series.len(),
        wanted.join(","),
        rejects.len(),
        gdd_rows
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
