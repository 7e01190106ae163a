mod cmd;
mod config;
mod error;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{check_range, RunConfig};
use error::{config_err, CliResult};

#[derive(Parser)]
#[command(name = "agmon", version, about = "Parcel monitoring pipelines over satellite time-series")]
struct Cli {
    /// key = value settings file with one [section] per subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (the AGMON_OUT variable overrides)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Data-cube operations
    #[command(subcommand)]
    Cube(CubeCmd),
    /// Time-series preparation
    #[command(subcommand)]
    Sits(SitsCmd),
    /// Spectral indices and degree-days from band values
    Indices(cmd::indices_cmd::IndicesArgs),
    /// Phenology estimation
    #[command(subcommand)]
    Pheno(PhenoCmd),
    /// Rice mapping
    #[command(subcommand)]
    Rice(RiceCmd),
    /// CAP compliance checks
    #[command(subcommand)]
    Cap(CapCmd),
    /// Score predictions against ground observations
    Eval(cmd::eval_cmd::EvalArgs),
}

#[derive(Subcommand)]
enum CubeCmd {
    /// Zonal statistics per parcel, date, and variable
    Stats(cmd::cube_stats::CubeStatsArgs),
}

#[derive(Subcommand)]
enum SitsCmd {
    /// Filter, interpolate, and resample raw series onto a fixed step
    Prepare(cmd::sits_prepare::SitsPrepareArgs),
}

#[derive(Subcommand)]
enum PhenoCmd {
    /// Season metrics from prepared index series
    Metrics(cmd::pheno_metrics_cmd::PhenoMetricsArgs),
    /// Fit the stage clustering and predict metaclasses
    Estimate(cmd::pheno_estimate::PhenoEstimateArgs),
    /// Continuous stage value against reference parcels
    Continuous(cmd::pheno_continuous::PhenoContinuousArgs),
}

#[derive(Subcommand)]
enum RiceCmd {
    /// Cluster sweep, pseudo-labels, forest, and the final map
    Map(cmd::rice_map::RiceMapArgs),
}

#[derive(Subcommand)]
enum CapCmd {
    /// Smart sampling of persistent green mismatches
    Sample(cmd::cap_sample::CapSampleArgs),
    /// Greening-1 crop diversification verdicts per farmer
    Greening(cmd::cap_greening::CapGreeningArgs),
    /// SMR1 watercourse buffer risk per parcel
    Smr1(cmd::cap_smr1::CapSmr1Args),
}

#[cfg(feature = "parallel")]
fn init_threads(n: usize) {
    // A second build_global in the same process is harmless; keep the first.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_n: usize) {}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> CliResult<PathBuf> {
    if let Ok(dir) = std::env::var("AGMON_OUT") {
        if !dir.is_empty() {
            return Ok(PathBuf::from(dir));
        }
    }
    if let Some(dir) = flag {
        return Ok(dir);
    }
    if let Some(dir) = cfg.raw("global", "out_dir") {
        return Ok(PathBuf::from(dir));
    }
    Err(config_err("no output directory: pass --out, set [global] out_dir, or AGMON_OUT"))
}

fn dispatch(command: &Command, cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    match command {
        Command::Cube(CubeCmd::Stats(args)) => cmd::cube_stats::run(args, cfg, out_dir),
        Command::Sits(SitsCmd::Prepare(args)) => cmd::sits_prepare::run(args, cfg, out_dir),
        Command::Indices(args) => cmd::indices_cmd::run(args, cfg, out_dir),
        Command::Pheno(PhenoCmd::Metrics(args)) => cmd::pheno_metrics_cmd::run(args, cfg, out_dir),
        Command::Pheno(PhenoCmd::Estimate(args)) => cmd::pheno_estimate::run(args, cfg, out_dir),
        Command::Pheno(PhenoCmd::Continuous(args)) => {
            cmd::pheno_continuous::run(args, cfg, out_dir)
        }
        Command::Rice(RiceCmd::Map(args)) => cmd::rice_map::run(args, cfg, out_dir),
        Command::Cap(CapCmd::Sample(args)) => cmd::cap_sample::run(args, cfg, out_dir),
        Command::Cap(CapCmd::Greening(args)) => cmd::cap_greening::run(args, cfg, out_dir),
        Command::Cap(CapCmd::Smr1(args)) => cmd::cap_smr1::run(args, cfg, out_dir),
        Command::Eval(args) => cmd::eval_cmd::run(args, cfg, out_dir),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let threads = cfg.resolve(cli.threads, "global", "threads", 0usize)?;
    check_range("threads", threads, 0, 4096)?;
    if threads > 0 {
        init_threads(threads);
    }
    let out_dir = resolve_out_dir(cli.out.clone(), &cfg)?;
    dispatch(&cli.command, &cfg, &out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
