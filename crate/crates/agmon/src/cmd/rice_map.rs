use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use ml_core::{DEFAULT_MAX_DEPTH, DEFAULT_N_TREES};
use rice_pipeline::{
    evaluate_k, k_seed, rice_map, select_best_k, sweep_k, RiceReferenceSignature,
    DEFAULT_K_RANGE, DEFAULT_PIXEL_AREA_HA,
};

use super::{csv_quote, PARALLEL};
use crate::config::{check_range, RunConfig};
use crate::error::{config_err, data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct RiceMapArgs {
    /// Wide pixel CSV: pixel_id then one column per feature
    #[arg(long)]
    pub pixels: PathBuf,
    /// Reference labels: pixel_id,is_rice (the labeled subset)
    #[arg(long)]
    pub labels: PathBuf,
    /// Full truth labels; adds accuracy metrics
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// RNG seed (clustering and forest are stochastic)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smallest cluster count to sweep
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Largest cluster count to sweep
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Forest size
    #[arg(long)]
    pub trees: Option<usize>,
    /// Tree depth cap
    #[arg(long)]
    pub depth: Option<usize>,
    /// Area of one pixel in hectares
    #[arg(long)]
    pub pixel_area: Option<f64>,
}

fn read_label_map(text: &str, rejects: &mut Vec<(usize, String)>) -> BTreeMap<i64, bool> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let parsed = record.ok().and_then(|r| {
            let id: i64 = r.get(0)?.trim().parse().ok()?;
            let flag = match r.get(1)?.trim() {
                "0" | "false" => false,
                "1" | "true" => true,
                _ => return None,
            };
            Some((id, flag))
        });
        match parsed {
            Some((id, flag)) => {
                if out.insert(id, flag).is_some() {
                    rejects.push((line, format!("duplicate label for pixel {id}")));
                }
            }
            None => rejects.push((line, "bad label row".into())),
        }
    }
    out
}

pub fn run(args: &RiceMapArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let Some(seed) = cfg.resolve_opt(args.seed, "rice-map", "seed")? else {
        return Err(config_err("--seed is required: clustering and forest are stochastic"));
    };
    let k_min = cfg.resolve(args.k_min, "rice-map", "k-min", DEFAULT_K_RANGE.0)?;
    let k_max = cfg.resolve(args.k_max, "rice-map", "k-max", DEFAULT_K_RANGE.1)?;
    check_range("k-min", k_min, 2, 64)?;
    check_range("k-max", k_max, k_min, 64)?;
    let trees = cfg.resolve(args.trees, "rice-map", "trees", DEFAULT_N_TREES)?;
    check_range("trees", trees, 1, 1000)?;
    let depth = cfg.resolve(args.depth, "rice-map", "depth", DEFAULT_MAX_DEPTH)?;
    check_range("depth", depth, 1, 64)?;
    let pixel_area = cfg.resolve(args.pixel_area, "rice-map", "pixel-area", DEFAULT_PIXEL_AREA_HA)?;
    if !pixel_area.is_finite() || pixel_area <= 0.0 {
        return Err(config_err(format!("pixel-area = {pixel_area}: need a positive area")));
    }

    let mut ctx = RunContext::new("rice-map", out_dir)?;
    ctx.seed(seed);
    ctx.setting("k-min", k_min);
    ctx.setting("k-max", k_max);
    ctx.setting("trees", trees);
    ctx.setting("depth", depth);
    ctx.setting("pixel-area", pixel_area);

    let text = ctx.input_text(&args.pixels)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| data_err(format!("pixels header: {e}")))?.clone();
    if headers.get(0) != Some("pixel_id") || headers.len() < 2 {
        return Err(data_err("pixels csv must start with pixel_id then feature columns"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();

    let mut rejects: Vec<(usize, String)> = Vec::new();
    let mut ids: Vec<i64> = Vec::new();
    let mut x: Vec<Vec<f64>> = Vec::new();
    let mut seen: BTreeMap<i64, ()> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejects.push((line, format!("unreadable: {e}")));
                continue;
            }
        };
        let id: i64 = match record.get(0).unwrap_or("").trim().parse() {
            Ok(v) => v,
            Err(_) => {
                rejects.push((line, "bad pixel_id".into()));
                continue;
            }
        };
        if seen.insert(id, ()).is_some() {
            rejects.push((line, format!("duplicate pixel {id}")));
            continue;
        }
        let mut row = Vec::with_capacity(names.len());
        for j in 1..headers.len() {
            match record.get(j).unwrap_or("").trim().parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => break,
            }
        }
        if row.len() != names.len() {
            rejects.push((line, "bad feature value".into()));
            continue;
        }
        ids.push(id);
        x.push(row);
    }
    if x.is_empty() {
        return Err(data_err("no usable pixels"));
    }
    let row_of: BTreeMap<i64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let labels_text = ctx.input_text(&args.labels)?;
    let label_map = read_label_map(&labels_text, &mut rejects);
    let mut labeled: Vec<(usize, bool)> = Vec::new();
    for (&id, &flag) in &label_map {
        match row_of.get(&id) {
            Some(&row) => labeled.push((row, flag)),
            None => rejects.push((0, format!("label for unknown pixel {id}"))),
        }
    }
    if labeled.is_empty() {
        return Err(data_err("no reference labels match the pixel set"));
    }

    let truth: Option<Vec<usize>> = match &args.truth {
        None => None,
        Some(path) => {
            let ttext = ctx.input_text(path)?;
            let tmap = read_label_map(&ttext, &mut rejects);
            let mut t = Vec::with_capacity(ids.len());
            for &id in &ids {
                match tmap.get(&id) {
                    Some(&flag) => t.push(usize::from(flag)),
                    None => return Err(data_err(format!("truth file misses pixel {id}"))),
                }
            }
            Some(t)
        }
    };

    let reference = RiceReferenceSignature::from_labeled(&x, &labeled)?;
    let ks: Vec<usize> = (k_min..=k_max).collect();
    let candidates = sweep_k(&x, &reference, &labeled, &ks, seed, PARALLEL)?;
    let best = select_best_k(&candidates)?;
    let (_, pseudo) = evaluate_k(&x, &reference, &labeled, best.k, k_seed(seed, best.k))?;
    let map = rice_map(&x, &names, &pseudo, truth.as_deref(), trees, depth, pixel_area, seed, PARALLEL)?;

    let mut cand_csv = String::from("k,precision,recall,f1,selected\n");
    for c in &candidates {
        cand_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            c.k,
            c.precision,
            c.recall,
            c.f1,
            c.k == best.k
        ));
    }
    ctx.write("candidates.csv", &cand_csv)?;

    let mut map_csv = String::from("pixel_id,is_rice\n");
    for (id, label) in ids.iter().zip(&map.labels) {
        map_csv.push_str(&format!("{id},{label}\n"));
    }
    ctx.write("rice_map.csv", &map_csv)?;

    if let Some(metrics) = &map.metrics {
        let mut mcsv = String::from("metric,value\n");
        mcsv.push_str(&format!("overall_accuracy,{}\n", metrics.overall_accuracy));
        mcsv.push_str(&format!("kappa,{}\n", metrics.kappa));
        for (i, v) in metrics.producer_accuracy.iter().enumerate() {
            if let Some(v) = v {
                mcsv.push_str(&format!("producer_accuracy_{i},{v}\n"));
            }
        }
        for (i, v) in metrics.user_accuracy.iter().enumerate() {
            if let Some(v) = v {
                mcsv.push_str(&format!("user_accuracy_{i},{v}\n"));
            }
        }
        for (i, v) in metrics.f1.iter().enumerate() {
            if let Some(v) = v {
                mcsv.push_str(&format!("f1_{i},{v}\n"));
            }
        }
        ctx.write("metrics.csv", &mcsv)?;
    }

    let mut rej = String::from("line,reason\n");
    for (line, reason) in &rejects {
        rej.push_str(&format!("{line},{}\n", csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "rice-map: {} pixels, {} labeled, best k {} (precision {:.4}, recall {:.4})",
        ids.len(),
        labeled.len(),
        best.k,
        best.precision,
        best.recall
    );
    println!(
        "rice pixels: {}, area {:.2} ha{}",
        map.labels.iter().filter(|&&l| l == 1).count(),
        map.total_area_ha,
        match &map.metrics {
            Some(m) => format!(
                ", truth f1 {:.4}",
                m.f1.get(1).copied().flatten().unwrap_or(f64::NAN)
            ),
            None => String::new(),
        }
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
