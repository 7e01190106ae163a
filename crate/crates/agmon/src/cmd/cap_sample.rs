use std::path::{Path, PathBuf};

use clap::Args;
use cap_compliance::{
    persistence_threshold, read_runs_csv, read_taxonomy_csv, season_filter, smart_sampling, Bands,
};

use super::csv_quote;
use crate::config::RunConfig;
use crate::error::{config_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct CapSampleArgs {
    /// Classification runs CSV: parcel_id,run_day,declared,predicted,score_1..score_k
    #[arg(long)]
    pub runs: PathBuf,
    /// Crop taxonomy CSV; required with --season-filter
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Green band floor on the top-2 score gap
    #[arg(long)]
    pub green: Option<f64>,
    /// Yellow band floor
    #[arg(long)]
    pub yellow: Option<f64>,
    /// Red band floor
    #[arg(long)]
    pub red: Option<f64>,
    /// Keep only alarms whose declared and predicted crops differ in season
    #[arg(long)]
    pub season_filter: bool,
}

pub fn run(args: &CapSampleArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let defaults = Bands::default();
    let green = cfg.resolve(args.green, "cap-sample", "green", defaults.green)?;
    let yellow = cfg.resolve(args.yellow, "cap-sample", "yellow", defaults.yellow)?;
    let red = cfg.resolve(args.red, "cap-sample", "red", defaults.red)?;
    let bands = Bands::new(green, yellow, red).map_err(config_err)?;
    let filter = args.season_filter
        || cfg.resolve(None::<bool>, "cap-sample", "season-filter", false)?;
    if filter && args.taxonomy.is_none() {
        return Err(config_err("--season-filter needs --taxonomy"));
    }

    let mut ctx = RunContext::new("cap-sample", out_dir)?;
    ctx.setting("green", green);
    ctx.setting("yellow", yellow);
    ctx.setting("red", red);
    ctx.setting("season-filter", filter);

    let text = ctx.input_text(&args.runs)?;
    let (runs, mut rejects) = read_runs_csv(&text)?;
    let alarms = smart_sampling(&runs, &bands)?;

    let kept = if filter {
        let ttext = ctx.input_text(args.taxonomy.as_ref().unwrap())?;
        let (taxonomy, tax_rejects) = read_taxonomy_csv(&ttext)?;
        rejects.extend(tax_rejects);
        season_filter(&alarms, runs.last().unwrap(), &taxonomy)?
    } else {
        alarms.clone()
    };

    let latest = runs.last().unwrap();
    let mut out = String::from("parcel_id,declared,predicted,kept\n");
    for &id in &alarms {
        let (declared, predicted) = match latest.parcels.get(&id) {
            Some(obs) => (obs.declared.as_str(), obs.predicted.as_str()),
            None => ("", ""),
        };
        out.push_str(&format!(
            "{id},{},{},{}\n",
            csv_quote(declared),
            csv_quote(predicted),
            kept.contains(&id)
        ));
    }
    ctx.write("alarms.csv", &out)?;

    let mut rej = String::from("line,reason\n");
    for r in &rejects {
        rej.push_str(&format!("{},{}\n", r.line, csv_quote(&r.reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    let parcels: std::collections::BTreeSet<i64> =
        runs.iter().flat_map(|r| r.parcels.keys().copied()).collect();
    println!(
        "cap-sample: {} runs over {} parcels, persistence threshold {}",
        runs.len(),
        parcels.len(),
        persistence_threshold(runs.len())?
    );
    println!(
        "alarms: {} raw, {} kept{}, {} rejects",
        alarms.len(),
        kept.len(),
        if filter { " after season filter" } else { "" },
        rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
