pub mod cap_greening;
pub mod cap_sample;
pub mod cap_smr1;
pub mod cube_stats;
pub mod eval_cmd;
pub mod indices_cmd;
pub mod pheno_continuous;
pub mod pheno_estimate;
pub mod pheno_metrics_cmd;
pub mod rice_map;
pub mod sits_prepare;

/// Compile-time parallelism switch; `--threads` caps the pool at runtime.
pub const PARALLEL: bool = cfg!(feature = "parallel");

/// Quote a CSV field if it holds a delimiter, quote, or newline.
pub fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Shortest round-trip float text; empty for null.
pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}
