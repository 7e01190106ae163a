use std::path::{Path, PathBuf};

use clap::Args;
use cap_compliance::{greening1_by_farmer, Greening1};

use super::csv_quote;
use crate::config::RunConfig;
use crate::error::{data_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct CapGreeningArgs {
    /// Declared areas CSV: farmer_id,crop_code,area_ha
    #[arg(long)]
    pub declarations: PathBuf,
}

pub fn run(args: &CapGreeningArgs, _cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let mut ctx = RunContext::new("cap-greening", out_dir)?;

    let text = ctx.input_text(&args.declarations)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| data_err(format!("header: {e}")))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(cf), Some(cc), Some(ca)) = (col("farmer_id"), col("crop_code"), col("area_ha"))
    else {
        return Err(data_err("declarations csv needs farmer_id, crop_code, area_ha columns"));
    };

    let mut rows: Vec<(String, String, f64)> = Vec::new();
    let mut rejects: Vec<(usize, String)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let parsed = record.ok().and_then(|r| {
            let farmer = r.get(cf)?.trim().to_string();
            let crop = r.get(cc)?.trim().to_string();
            let area: f64 = r.get(ca)?.trim().parse().ok()?;
            (!farmer.is_empty() && !crop.is_empty() && area.is_finite() && area >= 0.0)
                .then_some((farmer, crop, area))
        });
        match parsed {
            Some(row) => rows.push(row),
            None => rejects.push((line, "bad declaration row".into())),
        }
    }
    if rows.is_empty() {
        return Err(data_err("no usable declarations"));
    }

    let verdicts = greening1_by_farmer(&rows)?;
    let mut out = String::from("farmer_id,verdict,reason\n");
    let mut breaches = 0usize;
    for (farmer, verdict) in &verdicts {
        let (name, reason) = match verdict {
            Greening1::Exempt => ("exempt", String::new()),
            Greening1::Compliant => ("compliant", String::new()),
            Greening1::Breach(reason) => {
                breaches += 1;
                ("breach", reason.clone())
            }
        };
        out.push_str(&format!("{},{name},{}\n", csv_quote(farmer), csv_quote(&reason)));
    }
    ctx.write("greening.csv", &out)?;

    let mut rej = String::from("line,reason\n");
    for (line, reason) in &rejects {
        rej.push_str(&format!("{line},{}\n", csv_quote(reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "cap-greening: {} farmers, {} breaches, {} rejects",
        verdicts.len(),
        breaches,
        rejects.len()
    );
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
