use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use pheno_pipeline::{
    predict_continuous, ReferenceParcel, Stage, DEFAULT_SLOPE_STEP, DEFAULT_TW,
};
use sits::read_timeseries_csv;

use super::csv_quote;
use crate::config::{check_range, RunConfig};
use crate::error::{config_err, data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct PhenoContinuousArgs {
    /// Query parcels, long time-series CSV
    #[arg(long)]
    pub query: PathBuf,
    /// Reference parcels, long time-series CSV
    #[arg(long)]
    pub refs: PathBuf,
    /// Stage boundaries per reference parcel: parcel_id,stage,first_day,last_day
    #[arg(long)]
    pub boundaries: PathBuf,
    /// Day of prediction (day of year)
    #[arg(long)]
    pub dop: Option<u32>,
    /// Matching window length in days
    #[arg(long)]
    pub tw: Option<u32>,
    /// Slope step inside the window, days
    #[arg(long)]
    pub slope_step: Option<u32>,
}

type SeriesMap = BTreeMap<i64, BTreeMap<String, Vec<(u32, f64)>>>;

fn group_series(text: &str, rejects: &mut Vec<(String, String)>) -> CliResult<SeriesMap> {
    let (series, row_rejects) = read_timeseries_csv(text)?;
    for r in row_rejects {
        rejects.push((format!("line {}", r.line), r.reason));
    }
    let mut grouped: SeriesMap = BTreeMap::new();
    for ((parcel, variable), ts) in &series {
        let points: Vec<(u32, f64)> =
            ts.points.iter().filter_map(|&(d, v)| v.map(|v| (d, v))).collect();
        if points.len() >= 2 {
            grouped.entry(*parcel).or_default().insert(variable.clone(), points);
        } else {
            rejects.push((
                format!("{parcel}/{variable}"),
                "fewer than 2 observations".into(),
            ));
        }
    }
    Ok(grouped)
}

pub fn run(args: &PhenoContinuousArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let Some(dop) = cfg.resolve_opt(args.dop, "pheno-continuous", "dop")? else {
        return Err(config_err("--dop is required"));
    };
    check_range("dop", dop, 1, 366)?;
    let tw = cfg.resolve(args.tw, "pheno-continuous", "tw", DEFAULT_TW)?;
    check_range("tw", tw, 5, 200)?;
    let slope_step = cfg.resolve(args.slope_step, "pheno-continuous", "slope-step", DEFAULT_SLOPE_STEP)?;
    check_range("slope-step", slope_step, 1, tw)?;
    if tw % slope_step != 0 {
        return Err(config_err(format!("tw = {tw} not divisible by slope-step = {slope_step}")));
    }

    let mut ctx = RunContext::new("pheno-continuous", out_dir)?;
    ctx.setting("dop", dop);
    ctx.setting("tw", tw);
    ctx.setting("slope-step", slope_step);

    let mut rejects: Vec<(String, String)> = Vec::new();
    let query_text = ctx.input_text(&args.query)?;
    let queries = group_series(&query_text, &mut rejects)?;
    let refs_text = ctx.input_text(&args.refs)?;
    let ref_series = group_series(&refs_text, &mut rejects)?;

    let bounds_text = ctx.input_text(&args.boundaries)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(bounds_text.as_bytes());
    let headers = reader.headers().map_err(|e| data_err(format!("boundaries header: {e}")))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ci), Some(cs), Some(cf), Some(cl)) =
        (col("parcel_id"), col("stage"), col("first_day"), col("last_day"))
    else {
        return Err(data_err(
            "boundaries csv needs parcel_id, stage, first_day, last_day columns",
        ));
    };
    let mut boundaries: BTreeMap<i64, Vec<(Stage, u32, u32)>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let parsed = record.ok().and_then(|r| {
            let parcel: i64 = r.get(ci)?.trim().parse().ok()?;
            let stage = Stage::parse(r.get(cs)?.trim()).ok()?;
            let first: u32 = r.get(cf)?.trim().parse().ok()?;
            let last: u32 = r.get(cl)?.trim().parse().ok()?;
            (first <= last).then_some((parcel, stage, first, last))
        });
        match parsed {
            Some((parcel, stage, first, last)) => {
                boundaries.entry(parcel).or_default().push((stage, first, last))
            }
            None => rejects.push((format!("line {line}"), "bad boundary row".into())),
        }
    }

    let mut refs = Vec::new();
    for (parcel, series) in &ref_series {
        match boundaries.get(parcel) {
            Some(bounds) => {
                let mut bounds = bounds.clone();
                bounds.sort_by_key(|&(_, first, _)| first);
                refs.push(ReferenceParcel { series: series.clone(), boundaries: bounds });
            }
            None => rejects.push((format!("{parcel}"), "reference without boundaries".into())),
        }
    }
    if refs.is_empty() {
        return Err(data_err("no usable reference parcels"));
    }

    let mut out = String::from("parcel_id,day,stage_value,stage,fraction\n");
    let mut predicted = 0usize;
    for (parcel, series) in &queries {
        match predict_continuous(series, &refs, dop, tw, slope_step) {
            Ok(cs) => {
                out.push_str(&format!(
                    "{parcel},{dop},{},{},{}\n",
                    cs.value(),
                    cs.stage().name(),
                    cs.fraction()
                ));
                predicted += 1;
            }
            Err(e) => rejects.push((format!("{parcel}"), e.to_string())),
        }
    }
    ctx.write("continuous.csv", &out)?;

    let mut rej = String::from("item,reason\n");
    for (item, reason) in &rejects {
        rej.push_str(&format!("{},{}\n", csv_quote(item), csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "pheno-continuous: dop {dop}, {} references, {} queries, {} predicted, {} rejects",
        refs.len(),
        queries.len(),
        predicted,
        rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
