use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::Args;
use pheno_pipeline::{
    baseline_doy, build_element_space, eval_phenology, fit_phenology, predict_metaclass,
    read_ground_obs_csv, write_predictions_csv, FcmPhenoModel, Metaclass, PhenoEval,
    PhenoPrediction,
};
use sits::read_timeseries_csv;

use super::csv_quote;
use crate::config::RunConfig;
use crate::error::{config_err, data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct PhenoEstimateArgs {
    /// Per-element feature series, long CSV (parcel_id,day,variable,value)
    #[arg(long)]
    pub features: PathBuf,
    /// Ground observations CSV; adds an evaluation section
    #[arg(long)]
    pub ground: Option<PathBuf>,
    /// RNG seed (the clustering is stochastic)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated feature subset (default: every variable present)
    #[arg(long)]
    pub select: Option<String>,
}

fn eval_against(
    rows: &[(i64, u32)],
    preds: &[PhenoPrediction],
    truth: &BTreeMap<(i64, u32), Metaclass>,
) -> CliResult<(PhenoEval, usize)> {
    let mut matched_preds = Vec::new();
    let mut matched_truth = Vec::new();
    for (key, pred) in rows.iter().zip(preds) {
        if let Some(t) = truth.get(key) {
            matched_preds.push(pred.clone());
            matched_truth.push(*t);
        }
    }
    let n = matched_preds.len();
    if n == 0 {
        return Err(data_err("no overlap between predictions and ground observations"));
    }
    Ok((eval_phenology(&matched_preds, &matched_truth)?, n))
}

fn eval_lines(prefix: &str, eval: &PhenoEval, out: &mut String) {
    for (i, v) in eval.maxdiff.iter().enumerate() {
        out.push_str(&format!("{prefix}maxdiff_{i},{v}\n"));
    }
    out.push_str(&format!("{prefix}kappa,{}\n", eval.kappa));
    out.push_str(&format!("{prefix}kappa_linear,{}\n", eval.kappa_linear));
    out.push_str(&format!("{prefix}kappa_quadratic,{}\n", eval.kappa_quadratic));
    out.push_str(&format!("{prefix}ndcg2,{}\n", eval.ndcg2));
}

pub fn run(args: &PhenoEstimateArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let Some(seed) = cfg.resolve_opt(args.seed, "pheno-estimate", "seed")? else {
        return Err(config_err("--seed is required: the clustering is stochastic"));
    };
    let select = cfg.resolve_opt(args.select.clone(), "pheno-estimate", "select")?;

    let mut ctx = RunContext::new("pheno-estimate", out_dir)?;
    ctx.seed(seed);

    let text = ctx.input_text(&args.features)?;
    let (series, row_rejects) = read_timeseries_csv(&text)?;

    let mut values: BTreeMap<(i64, u32), BTreeMap<String, f64>> = BTreeMap::new();
    let mut present: BTreeSet<String> = BTreeSet::new();
    for ((parcel, variable), ts) in &series {
        present.insert(variable.clone());
        for &(day, v) in &ts.points {
            if let Some(v) = v {
                values.entry((*parcel, day)).or_default().insert(variable.clone(), v);
            }
        }
    }
    let feature_names: Vec<String> = match &select {
        None => present.iter().cloned().collect(),
        Some(list) => {
            let mut names = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                if !present.contains(name) {
                    return Err(data_err(format!("selected feature `{name}` not in input")));
                }
                names.push(name.to_string());
            }
            names
        }
    };
    if feature_names.is_empty() {
        return Err(data_err("no feature variables in input"));
    }
    ctx.setting("select", feature_names.join(","));

    let space = build_element_space(&values, &feature_names);
    if space.rows.is_empty() {
        return Err(data_err("no complete feature rows to cluster"));
    }
    let model: FcmPhenoModel = fit_phenology(&space, seed)?;
    let preds: Vec<PhenoPrediction> =
        space.dataset.x.iter().map(|x| predict_metaclass(&model, x)).collect();

    let rows: Vec<(i64, u32, PhenoPrediction)> = space
        .rows
        .iter()
        .zip(&preds)
        .map(|(&(field, day), p)| (field, day, p.clone()))
        .collect();
    ctx.write("predictions.csv", &write_predictions_csv(&rows))?;
    ctx.write(
        "model.json",
        &format!("{}\n", serde_json::to_string_pretty(&model).map_err(data_err)?),
    )?;

    let mut rej = String::from("scope,item,reason\n");
    for r in &row_rejects {
        rej.push_str(&format!("row,line {},{}\n", r.line, csv_quote(&r.reason)));
    }
    for d in &space.dropped {
        rej.push_str(&format!(
            "element,{}/{},{}\n",
            d.field,
            d.day,
            csv_quote(&format!("missing {}", d.missing))
        ));
    }

    let order: Vec<&str> = model.stage_order.iter().map(|s| s.name()).collect();
    println!(
        "pheno-estimate: {} elements ({} dropped), features [{}], stage order [{}], th_w {:.4}",
        space.rows.len(),
        space.dropped.len(),
        feature_names.join(","),
        order.join(","),
        model.th_w
    );

    if let Some(ground_path) = &args.ground {
        let gtext = ctx.input_text(ground_path)?;
        let (obs, obs_rejects) = read_ground_obs_csv(&gtext)?;
        for r in &obs_rejects {
            rej.push_str(&format!("ground,line {},{}\n", r.line, csv_quote(&r.reason)));
        }
        let truth: BTreeMap<(i64, u32), Metaclass> =
            obs.iter().map(|o| ((o.field, o.day), o.metaclass())).collect();

        let (eval, matched) = eval_against(&space.rows, &preds, &truth)?;
        let baseline = baseline_doy(&space, seed)?;
        let base_preds: Vec<PhenoPrediction> = {
            let cols = space.columns(&baseline.feature_set)?;
            cols.iter().map(|x| predict_metaclass(&baseline, x)).collect()
        };
        let (base_eval, _) = eval_against(&space.rows, &base_preds, &truth)?;

        let mut eout = String::from("metric,value\n");
        eout.push_str(&format!("matched,{matched}\n"));
        eval_lines("", &eval, &mut eout);
        eval_lines("baseline_", &base_eval, &mut eout);
        for (i, d) in eval.mean_displacement.iter().enumerate() {
            if let Some(d) = d {
                eout.push_str(&format!("mean_displacement_{},{d}\n", i + 1));
            }
        }
        ctx.write("eval.csv", &eout)?;
        println!(
            "eval on {matched} matched: maxdiff-1 {:.4} (baseline {:.4}), kappa {:.4}, ndcg2 {:.4}",
            eval.maxdiff[1], base_eval.maxdiff[1], eval.kappa, eval.ndcg2
        );
    }

    ctx.write("rejects.csv", &rej)?;
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
