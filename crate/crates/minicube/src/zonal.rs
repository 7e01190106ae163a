use crate::cube::Cube;
use crate::parcels::ParcelIdRaster;
use crate::CubeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducer {
    Mean,
    Min,
    Max,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZonalMode {
    /// One pass per (date, variable) slice, all parcels at once.
    GroupBy,
    /// Rescan the whole slice once per parcel. Slow; kept as the oracle.
    Serial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonalRow {
    pub parcel_id: i64,
    pub date: u32,
    pub variable: String,
    pub value: Option<f64>,
}

#[derive(Clone, Copy)]
struct Acc {
    sum: f64,
    count: u64,
    min: f64,
    max: f64,
}

impl Acc {
    fn new() -> Self {
        Acc { sum: 0.0, count: 0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    fn push(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
        if x < self.min {
            self.min = x;
        }
        if x > self.max {
            self.max = x;
        }
    }

    fn finish(&self, reducer: Reducer) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        Some(match reducer {
            Reducer::Mean => self.sum / self.count as f64,
            Reducer::Min => self.min,
            Reducer::Max => self.max,
            Reducer::Count => self.count as f64,
        })
    }
}

fn groupby_slice(slice: &[f64], ids: &[i64], dense: &[i64], reducer: Reducer) -> Vec<Option<f64>> {
    let mut accs = vec![Acc::new(); dense.len()];
    // row-major scan; per-parcel add order therefore matches the serial oracle
    // bit for bit.
    for (i, &x) in slice.iter().enumerate() {
        let id = ids[i];
        if id >= 0 && !x.is_nan() {
            let d = dense.binary_search(&id).expect("raster id missing from universe");
            accs[d].push(x);
        }
    }
    accs.iter().map(|a| a.finish(reducer)).collect()
}

fn serial_slice(slice: &[f64], ids: &[i64], dense: &[i64], reducer: Reducer) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(dense.len());
    for &id in dense {
        let mut acc = Acc::new();
        for (i, &x) in slice.iter().enumerate() {
            if ids[i] == id && !x.is_nan() {
                acc.push(x);
            }
        }
        out.push(acc.finish(reducer));
    }
    out
}

/// Reduce every parcel over every (date, variable) slice. Rows come out
/// ordered by (parcel id, date, variable) regardless of mode or parallelism;
/// parcels whose id never appears in the raster emit nothing, parcels with no
/// valid pixel in a slice emit a null value.
pub fn zonal_stats(
    cube: &Cube,
    ids: &ParcelIdRaster,
    reducer: Reducer,
    mode: ZonalMode,
    parallel: bool,
) -> Result<Vec<ZonalRow>, CubeError> {
    if cube.grid != ids.grid {
        return Err(CubeError::GridMismatch);
    }
    let mut dense: Vec<i64> = ids.ids.iter().copied().filter(|&i| i >= 0).collect();
    dense.sort_unstable();
    dense.dedup();

    let n_slices = cube.dates.len() * cube.variables.len();
    let n_vars = cube.variables.len();
    let per_slice = |s: usize| {
        let (t, v) = (s / n_vars, s % n_vars);
        let slice = cube.slice(t, v);
        match mode {
            ZonalMode::GroupBy => groupby_slice(slice, &ids.ids, &dense, reducer),
            ZonalMode::Serial => serial_slice(slice, &ids.ids, &dense, reducer),
        }
    };

    let by_slice: Vec<Vec<Option<f64>>> = run_slices(n_slices, parallel, per_slice);

    let mut rows = Vec::with_capacity(dense.len() * n_slices);
    for (d, &parcel_id) in dense.iter().enumerate() {
        for t in 0..cube.dates.len() {
            for v in 0..n_vars {
                rows.push(ZonalRow {
                    parcel_id,
                    date: cube.dates[t],
                    variable: cube.variables[v].clone(),
                    value: by_slice[t * n_vars + v][d],
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(feature = "parallel")]
fn run_slices<F>(n: usize, parallel: bool, f: F) -> Vec<Vec<Option<f64>>>
where
    F: Fn(usize) -> Vec<Option<f64>> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_slices<F>(n: usize, _parallel: bool, f: F) -> Vec<Vec<Option<f64>>>
where
    F: Fn(usize) -> Vec<Option<f64>>,
{
    (0..n).map(f).collect()
}
