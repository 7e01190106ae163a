use std::path::{Path, PathBuf};

use clap::Args;
use minicube::{
    inward_buffer, rasterize_parcels, read_cube_dir, read_parcels_geojson, zonal_stats, Reducer,
    ZonalMode,
};

use super::{csv_quote, fmt_opt, PARALLEL};
use crate::config::{check_range, RunConfig};
use crate::error::{config_err, CliResult};
use crate::manifest::RunContext;

#[derive(Args)]
pub struct CubeStatsArgs {
    /// Cube directory (header.json plus one grid CSV per slice)
    #[arg(long)]
    pub cube: PathBuf,
    /// Parcel polygons, GeoJSON
    #[arg(long)]
    pub parcels: PathBuf,
    /// mean | min | max | count
    #[arg(long)]
    pub reducer: Option<String>,
    /// groupby | serial
    #[arg(long)]
    pub mode: Option<String>,
    /// Inward buffer in pixels before aggregation
    #[arg(long)]
    pub buffer: Option<usize>,
}

pub fn run(args: &CubeStatsArgs, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let reducer_s = cfg.resolve(args.reducer.clone(), "cube-stats", "reducer", "mean".into())?;
    let reducer = match reducer_s.as_str() {
        "mean" => Reducer::Mean,
        "min" => Reducer::Min,
        "max" => Reducer::Max,
        "count" => Reducer::Count,
        other => return Err(config_err(format!("reducer `{other}`, want mean|min|max|count"))),
    };
    let mode_s = cfg.resolve(args.mode.clone(), "cube-stats", "mode", "groupby".into())?;
    let mode = match mode_s.as_str() {
        "groupby" => ZonalMode::GroupBy,
        "serial" => ZonalMode::Serial,
        other => return Err(config_err(format!("mode `{other}`, want groupby|serial"))),
    };
    let buffer = cfg.resolve(args.buffer, "cube-stats", "buffer", 0usize)?;
    check_range("buffer", buffer, 0, 64)?;

    let mut ctx = RunContext::new("cube-stats", out_dir)?;
    ctx.setting("reducer", &reducer_s);
    ctx.setting("mode", &mode_s);
    ctx.setting("buffer", buffer);

    ctx.input_dir(&args.cube)?;
    let cube = read_cube_dir(&args.cube)?;
    let parcels_text = ctx.input_text(&args.parcels)?;
    let (parcels, rejected) = read_parcels_geojson(&parcels_text)?;
    let mut raster = rasterize_parcels(&parcels, &cube.grid)?;
    if buffer > 0 {
        raster = inward_buffer(&raster, buffer);
    }
    let rows = zonal_stats(&cube, &raster, reducer, mode, PARALLEL)?;

    let mut out = String::from("parcel_id,day,variable,value\n");
    let mut nulls = 0usize;
    for r in &rows {
        if r.value.is_none() {
            nulls += 1;
        }
        out.push_str(&format!("{},{},{},{}\n", r.parcel_id, r.date, r.variable, fmt_opt(r.value)));
    }
    ctx.write("zonal.csv", &out)?;

    let mut rej = String::from("index,reason\n");
    for r in &rejected {
        rej.push_str(&format!("{},{}\n", r.index, csv_quote(&r.reason)));
    }
    ctx.write("rejects.csv", &rej)?;

    println!(
        "cube-stats: {} parcels, {} dates, {} variables, reducer {reducer_s}, mode {mode_s}",
        parcels.len(),
        cube.dates.len(),
        cube.variables.len()
    );
    println!("zonal rows: {} ({} null), rejected features: {}", rows.len(), nulls, rejected.len());
    let manifest = ctx.finish()?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
