use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use pheno_metrics::{despike_median, extract_season, DEFAULT_DESPIKE_PASSES, DEFAULT_DESPIKE_Z};
use sits::{read_timeseries_csv, FixedStepSeries, TimeSeries};

use super::csv_quote;
use crate::config::{check_range, RunConfig};
use crate::error::CliResult;
use crate::manifest::RunContext;

#[derive(Args)]
pub struct PhenoMetricsArgs {
    /// Prepared fixed-step series CSV with ndvi, ndwi, psri per parcel
    #[arg(long)]
    pub input: PathBuf,
    /// Median despike passes
    #[arg(long)]
    pub despike_passes: Option<usize>,
    /// Despike threshold in robust z units
    #[arg(long)]
    pub despike_z: Option<f64>,
}

fn to_fixed_step(ts: &TimeSeries) -> Result<FixedStepSeries, String> {
    let mut days = Vec::with_capacity(ts.points.len());
    let mut values = Vec::with_capacity(ts.points.len());
    for &(d, v) in &ts.points {
        match v {
            Some(v) => {
                days.push(d);
                values.push(v);
            }
            None => return Err(format!("missing value at day {d}")),
        }
    }
    if days.len() < 3 {
        return Err("fewer than 3 anchors".into());
    }
    Ok(FixedStepSeries::new(days, values))
}

pub fn run(args: &PhenoMetricsArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let passes =
        cfg.resolve(args.despike_passes, "pheno-metrics", "despike-passes", DEFAULT_DESPIKE_PASSES)?;
    check_range("despike-passes", passes, 0, 50)?;
    let z = cfg.resolve(args.despike_z, "pheno-metrics", "despike-z", DEFAULT_DESPIKE_Z)?;
    check_range("despike-z", z, 0.1, 100.0)?;

    let mut ctx = RunContext::new("pheno-metrics", out_dir)?;
    ctx.setting("despike-passes", passes);
    ctx.setting("despike-z", z);

    let text = ctx.input_text(&args.input)?;
    let (series, row_rejects) = read_timeseries_csv(&text)?;

    let mut by_parcel: BTreeMap<i64, BTreeMap<String, &TimeSeries>> = BTreeMap::new();
    for ((parcel, variable), ts) in &series {
        by_parcel.entry(*parcel).or_default().insert(variable.clone(), ts);
    }

    let mut out = String::from(
        "parcel_id,sos,pos,eos,rate_inc,rate_dec,large_integral,small_integral,\
         biomass_indicator,yield_indicator,base_level\n",
    );
    let mut parcel_rejects: Vec<(i64, String)> = Vec::new();
    let mut seasons = 0usize;
    for (parcel, vars) in &by_parcel {
        let mut fixed = Vec::with_capacity(3);
        let mut failed = None;
        for name in ["ndvi", "ndwi", "psri"] {
            match vars.get(name) {
                None => {
                    failed = Some(format!("missing variable {name}"));
                    break;
                }
                Some(ts) => match to_fixed_step(ts) {
                    Ok(fs) => fixed.push(despike_median(&fs, passes, z)),
                    Err(reason) => {
                        failed = Some(format!("{name}: {reason}"));
                        break;
                    }
                },
            }
        }
        if let Some(reason) = failed {
            parcel_rejects.push((*parcel, reason));
            continue;
        }
        match extract_season(&fixed[0], &fixed[1], &fixed[2]) {
            Ok(m) => {
                out.push_str(&format!(
                    "{parcel},{},{},{},{},{},{},{},{},{},{}\n",
                    m.sos,
                    m.pos,
                    m.eos,
                    m.rate_inc,
                    m.rate_dec,
                    m.large_integral,
                    m.small_integral,
                    m.biomass_indicator,
                    m.yield_indicator,
                    m.base_level
                ));
                seasons += 1;
            }
            Err(e) => parcel_rejects.push((*parcel, e.to_string())),
        }
    }
    ctx.write("seasons.csv", &out)?;

    let mut rej = String::from("scope,item,reason\n");
    for r in &row_rejects {
        rej.push_str(&format!("row,line {},{}\n", r.line, csv_quote(&r.reason)));
    }
    for (parcel, reason) in &parcel_rejects {
        rej.push_str(&format!("parcel,{parcel},{}\n", csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "pheno-metrics: {} parcels, {} seasons extracted, {} parcel rejects, {} row rejects",
        by_parcel.len(),
        seasons,
        parcel_rejects.len(),
        row_rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
