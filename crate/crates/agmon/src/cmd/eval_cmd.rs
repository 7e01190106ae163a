use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use pheno_pipeline::{
    eval_phenology, read_ground_obs_csv, Metaclass, PhenoPrediction, Stage, STAGES,
};

use super::csv_quote;
use crate::config::RunConfig;
use crate::error::{data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct EvalArgs {
    /// Predictions CSV as written by `pheno estimate`
    #[arg(long)]
    pub predictions: PathBuf,
    /// Ground observations CSV
    #[arg(long)]
    pub ground: PathBuf,
}

/// Rebuild a prediction from its emitted row: the metaclass index plus the
/// six stage weights, re-ranked weight-descending (ordinal breaks ties).
fn parse_predictions(
    text: &str,
    rejects: &mut Vec<(usize, String)>,
) -> CliResult<BTreeMap<(i64, u32), PhenoPrediction>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| data_err(format!("predictions header: {e}")))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(cf), Some(cd), Some(cm)) = (col("field_id"), col("day"), col("metaclass")) else {
        return Err(data_err("predictions csv needs field_id, day, metaclass columns"));
    };
    let mut weight_cols = Vec::with_capacity(STAGES.len());
    for stage in STAGES {
        let name = format!("w_{}", stage.name().to_ascii_lowercase());
        let Some(c) = col(&name) else {
            return Err(data_err(format!("predictions csv misses column {name}")));
        };
        weight_cols.push((stage, c));
    }

    let mut out = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let parsed = record.ok().and_then(|r| {
            let field: i64 = r.get(cf)?.trim().parse().ok()?;
            let day: u32 = r.get(cd)?.trim().parse().ok()?;
            let index: usize = r.get(cm)?.trim().parse().ok()?;
            let metaclass = Metaclass::from_index(index).ok()?;
            let mut ranked: Vec<(Stage, f64)> = Vec::with_capacity(STAGES.len());
            for &(stage, c) in &weight_cols {
                let w: f64 = r.get(c)?.trim().parse().ok()?;
                if !w.is_finite() || w < 0.0 {
                    return None;
                }
                ranked.push((stage, w));
            }
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.ordinal().cmp(&b.0.ordinal())));
            Some(((field, day), PhenoPrediction { metaclass, ranked }))
        });
        match parsed {
            Some((key, pred)) => {
                if out.insert(key, pred).is_some() {
                    rejects.push((line, "duplicate (field, day)".into()));
                }
            }
            None => rejects.push((line, "bad prediction row".into())),
        }
    }
    Ok(out)
}

pub fn run(args: &EvalArgs, _cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let mut ctx = RunContext::new("eval", out_dir)?;
    let mut rejects: Vec<(usize, String)> = Vec::new();

    let pred_text = ctx.input_text(&args.predictions)?;
    let preds = parse_predictions(&pred_text, &mut rejects)?;
    let ground_text = ctx.input_text(&args.ground)?;
    let (obs, obs_rejects) = read_ground_obs_csv(&ground_text)?;

    let mut matched_preds = Vec::new();
    let mut matched_truth = Vec::new();
    for o in &obs {
        if let Some(pred) = preds.get(&(o.field, o.day)) {
            matched_preds.push(pred.clone());
            matched_truth.push(o.metaclass());
        }
    }
    if matched_preds.is_empty() {
        return Err(data_err("no (field, day) overlap between predictions and observations"));
    }
    let eval = eval_phenology(&matched_preds, &matched_truth)?;

    let mut out = String::from("metric,value\n");
    out.push_str(&format!("matched,{}\n", matched_preds.len()));
    for (i, v) in eval.maxdiff.iter().enumerate() {
        out.push_str(&format!("maxdiff_{i},{v}\n"));
    }
    out.push_str(&format!("kappa,{}\n", eval.kappa));
    out.push_str(&format!("kappa_linear,{}\n", eval.kappa_linear));
    out.push_str(&format!("kappa_quadratic,{}\n", eval.kappa_quadratic));
    out.push_str(&format!("ndcg2,{}\n", eval.ndcg2));
    for (i, d) in eval.mean_displacement.iter().enumerate() {
        if let Some(d) = d {
            out.push_str(&format!("mean_displacement_{},{d}\n", i + 1));
        }
    }
    ctx.write("eval.csv", &out)?;

    let mut rej = String::from("line,reason\n");
    for (line, reason) in &rejects {
        rej.push_str(&format!("{line},{}\n", csv_quote(reason)));
    }
    for r in &obs_rejects {
        rej.push_str(&format!("{},{}\n", r.line, csv_quote(&r.reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "eval: {} matched pairs, maxdiff-1 {:.4}, kappa {:.4}, ndcg2 {:.4}, {} rejects",
        matched_preds.len(),
        eval.maxdiff[1],
        eval.kappa,
        eval.ndcg2,
        rejects.len() + obs_rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
