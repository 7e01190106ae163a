use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use sits::{
    interpolate_fixed_step, read_timeseries_csv, threshold_filter, write_timeseries_csv,
    SeriesKey, TimeSeries, DEFAULT_RESAMPLE_STEP, DEFAULT_WINDOW_RADIUS,
};

use super::csv_quote;
use crate::config::{check_range, RunConfig};
use crate::error::{config_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct SitsPrepareArgs {
    /// Long-format time-series CSV (parcel_id,day,variable,value)
    #[arg(long)]
    pub input: PathBuf,
    /// Anchor spacing in days
    #[arg(long)]
    pub step: Option<u32>,
    /// IDW window radius in days
    #[arg(long)]
    pub window: Option<u32>,
    /// Drop observations below this value
    #[arg(long)]
    pub lo: Option<f64>,
    /// Drop observations above this value
    #[arg(long)]
    pub hi: Option<f64>,
}

pub fn run(args: &SitsPrepareArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let step = cfg.resolve(args.step, "sits-prepare", "step", DEFAULT_RESAMPLE_STEP)?;
    check_range("step", step, 1, 120)?;
    let window = cfg.resolve(args.window, "sits-prepare", "window", DEFAULT_WINDOW_RADIUS)?;
    check_range("window", window, 0, 120)?;
    let lo = cfg.resolve(args.lo, "sits-prepare", "lo", -1.0)?;
    let hi = cfg.resolve(args.hi, "sits-prepare", "hi", 1.0)?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(config_err(format!("bounds lo = {lo}, hi = {hi}: need finite lo < hi")));
    }

    let mut ctx = RunContext::new("sits-prepare", out_dir)?;
    ctx.setting("step", step);
    ctx.setting("window", window);
    ctx.setting("lo", lo);
    ctx.setting("hi", hi);

    let text = ctx.input_text(&args.input)?;
    let (series, row_rejects) = read_timeseries_csv(&text)?;

    let mut prepared: BTreeMap<SeriesKey, TimeSeries> = BTreeMap::new();
    let mut series_rejects: Vec<(SeriesKey, String)> = Vec::new();
    for (key, ts) in &series {
        let filtered = threshold_filter(ts, lo, hi)?;
        let obs: Vec<u32> = filtered.points.iter().filter(|(_, v)| v.is_some()).map(|&(d, _)| d).collect();
        if obs.len() < 2 {
            series_rejects.push((key.clone(), "fewer than 2 usable observations".into()));
            continue;
        }
        let anchors: Vec<u32> = (obs[0]..=*obs.last().unwrap()).step_by(step as usize).collect();
        match interpolate_fixed_step(&filtered, &anchors, window) {
            Ok(fs) => {
                let points = fs
                    .anchor_days
                    .iter()
                    .zip(&fs.values)
                    .map(|(&d, &v)| (d, Some(v)))
                    .collect();
                prepared.insert(key.clone(), TimeSeries::new(points));
            }
            Err(e) => series_rejects.push((key.clone(), e.to_string())),
        }
    }

    ctx.write("prepared.csv", &write_timeseries_csv(&prepared))?;

    let mut rej = String::from("scope,item,reason\n");
    for r in &row_rejects {
        rej.push_str(&format!("row,line {},{}\n", r.line, csv_quote(&r.reason)));
    }
    for ((parcel, variable), reason) in &series_rejects {
        rej.push_str(&format!("series,{parcel}/{variable},{}\n", csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "sits-prepare: {} series in, {} prepared, {} row rejects, {} series rejects",
        series.len(),
        prepared.len(),
        row_rejects.len(),
        series_rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
