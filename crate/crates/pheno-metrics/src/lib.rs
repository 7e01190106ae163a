//! Seasonality extraction from smoothed index series: spike removal,
//! Savitzky-Golay smoothing, season start/peak/end, rates and integrals.

use sits::FixedStepSeries;

pub const DEFAULT_DESPIKE_PASSES: usize = 3;
pub const DEFAULT_DESPIKE_Z: f64 = 2.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PhenoError {
    #[error("window must be odd and order below window")]
    InvalidParams,
    #[error("series must share anchors")]
    MismatchedAnchors,
    #[error("no season start found")]
    NoSeasonStart,
    #[error("no season end found")]
    NoSeasonEnd,
    #[error("season start, peak and end do not order")]
    DegenerateSeason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonMetrics {
    pub sos: f64,
    pub pos: f64,
    pub eos: f64,
    pub rate_inc: f64,
    pub rate_dec: f64,
    pub large_integral: f64,
    pub small_integral: f64,
    pub biomass_indicator: f64,
    pub yield_indicator: f64,
    pub base_level: f64,
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

fn median3(values: &[f64], i: usize) -> f64 {
    let n = values.len();
    let r = 1usize.min(i).min(n - 1 - i);
    if r == 0 {
        return values[i];
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    a.max(b).min(a.min(b).max(c)) // median of three
}

/// Iterated spike removal: points further than z standard deviations from the
/// 3-point rolling median are replaced by that median.
pub fn despike_median(fs: &FixedStepSeries, passes: usize, z: f64) -> FixedStepSeries {
    let mut values = fs.values.clone();
    for _ in 0..passes {
        let std = population_std(&values);
        let next: Vec<f64> = (0..values.len())
            .map(|i| {
                let med = median3(&values, i);
                if (values[i] - med).abs() > z * std {
                    med
                } else {
                    values[i]
                }
            })
            .collect();
        if next == values {
            break;
        }
        values = next;
    }
    FixedStepSeries::new(fs.anchor_days.clone(), values)
}

/// Gaussian elimination with partial pivoting; small systems only.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Least-squares polynomial smoother in day space; the window is clipped at
/// the series ends (and the fit order with it, if the clipped window gets
/// smaller than the requested order allows). Polynomials up to `order` pass
/// through unchanged.
pub fn savitzky_golay(
    fs: &FixedStepSeries,
    window: usize,
    order: usize,
) -> Result<FixedStepSeries, PhenoError> {
    if window % 2 == 0 || window == 0 || order >= window {
        return Err(PhenoError::InvalidParams);
    }
    let h = window / 2;
    let n = fs.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(h);
        let hi = (i + h).min(n - 1);
        let m = hi - lo + 1;
        let deg = order.min(m - 1);
        // normal equations on day offsets from the center point
        let mut ata = vec![vec![0.0; deg + 1]; deg + 1];
        let mut atb = vec![0.0; deg + 1];
        for j in lo..=hi {
            let x = fs.anchor_days[j] as f64 - fs.anchor_days[i] as f64;
            let mut pow = vec![1.0; 2 * deg + 1];
            for p in 1..=2 * deg {
                pow[p] = pow[p - 1] * x;
            }
            for r in 0..=deg {
                for c in 0..=deg {
                    ata[r][c] += pow[r + c];
                }
                atb[r] += pow[r] * fs.values[j];
            }
        }
        let coef = solve_linear(ata, atb);
        out.push(coef[0]); // value at offset 0
    }
    Ok(FixedStepSeries::new(fs.anchor_days.clone(), out))
}

fn check_anchors(a: &FixedStepSeries, b: &FixedStepSeries) -> Result<(), PhenoError> {
    if a.anchor_days != b.anchor_days {
        return Err(PhenoError::MismatchedAnchors);
    }
    Ok(())
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Day where the difference series d crosses from positive to non-positive
/// within segment (i, i+1), linearly interpolated; exact anchor hits land on
/// the anchor day.
fn crossing_day(days: &[u32], d: &[f64], i: usize) -> f64 {
    let (d0, d1) = (d[i], d[i + 1]);
    let (t0, t1) = (days[i] as f64, days[i + 1] as f64);
    t0 + d0 / (d0 - d1) * (t1 - t0)
}

/// Transplanting signal: the latest day before the NDVI peak where NDWI drops
/// from above NDVI to at or below it.
pub fn detect_sos(ndvi: &FixedStepSeries, ndwi: &FixedStepSeries) -> Result<f64, PhenoError> {
    check_anchors(ndvi, ndwi)?;
    let pos = argmax_first(&ndvi.values);
    let d: Vec<f64> = ndwi.values.iter().zip(&ndvi.values).map(|(w, v)| w - v).collect();
    let mut found = None;
    for i in 0..pos {
        if d[i] > 0.0 && d[i + 1] <= 0.0 {
            found = Some(crossing_day(&ndvi.anchor_days, &d, i));
        }
    }
    found.ok_or(PhenoError::NoSeasonStart)
}

/// Senescence signal: the first day after the NDVI peak where PSRI rises to
/// or above NDVI; if that never happens, the first drop of NDVI below
/// base + 0.1 * amplitude, interpolated the same way.
pub fn detect_eos(ndvi: &FixedStepSeries, psri: &FixedStepSeries) -> Result<f64, PhenoError> {
    check_anchors(ndvi, psri)?;
    let pos = argmax_first(&ndvi.values);
    let e: Vec<f64> = psri.values.iter().zip(&ndvi.values).map(|(p, v)| p - v).collect();
    for i in pos..ndvi.len() - 1 {
        if e[i] < 0.0 && e[i + 1] >= 0.0 {
            return Ok(crossing_day(&ndvi.anchor_days, &e, i));
        }
    }
    // fallback: base-plus-tenth-amplitude threshold
    let left_min = ndvi.values[..=pos].iter().cloned().fold(f64::INFINITY, f64::min);
    let right_min = ndvi.values[pos..].iter().cloned().fold(f64::INFINITY, f64::min);
    let base = (left_min + right_min) / 2.0;
    let threshold = base + 0.1 * (ndvi.values[pos] - base);
    let d: Vec<f64> = ndvi.values.iter().map(|v| v - threshold).collect();
    for i in pos..ndvi.len() - 1 {
        if d[i] > 0.0 && d[i + 1] <= 0.0 {
            return Ok(crossing_day(&ndvi.anchor_days, &d, i));
        }
    }
    Err(PhenoError::NoSeasonEnd)
}

/// NDVI value at an arbitrary day by linear interpolation between anchors;
/// exact anchor hits return the stored value untouched.
fn value_at(fs: &FixedStepSeries, day: f64) -> f64 {
    let days = &fs.anchor_days;
    if let Some(i) = days.iter().position(|&d| d as f64 == day) {
        return fs.values[i];
    }
    if day <= days[0] as f64 {
        return fs.values[0];
    }
    for i in 0..fs.len() - 1 {
        let (t0, t1) = (days[i] as f64, days[i + 1] as f64);
        if day <= t1 {
            let t = (day - t0) / (t1 - t0);
            return fs.values[i] + (fs.values[i + 1] - fs.values[i]) * t;
        }
    }
    fs.values[fs.len() - 1]
}

fn trapezoid(days: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..days.len() {
        acc += (values[i - 1] + values[i]) / 2.0 * (days[i] - days[i - 1]);
    }
    acc
}

/// Full season read-out. All integrals run on one shared grid whose nodes are
/// sos, the anchors strictly inside the season, and eos, so the biomass/yield
/// split at the peak sums back to the small integral without rounding slack.
pub fn extract_season(
    ndvi: &FixedStepSeries,
    ndwi: &FixedStepSeries,
    psri: &FixedStepSeries,
) -> Result<SeasonMetrics, PhenoError> {
    check_anchors(ndvi, ndwi)?;
    check_anchors(ndvi, psri)?;
    let sos = detect_sos(ndvi, ndwi)?;
    let eos = detect_eos(ndvi, psri)?;

    let pos_idx = argmax_first(&ndvi.values);
    let pos = ndvi.anchor_days[pos_idx] as f64;
    if !(sos < pos && pos < eos) {
        return Err(PhenoError::DegenerateSeason);
    }

    let left_min = ndvi
        .anchor_days
        .iter()
        .zip(&ndvi.values)
        .filter(|&(&d, _)| (d as f64) <= sos)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let right_min = ndvi
        .anchor_days
        .iter()
        .zip(&ndvi.values)
        .filter(|&(&d, _)| (d as f64) >= eos)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let base_level = (left_min + right_min) / 2.0;

    // shared integration grid
    let mut days = vec![sos];
    let mut values = vec![value_at(ndvi, sos)];
    for (i, &d) in ndvi.anchor_days.iter().enumerate() {
        let d = d as f64;
        if d > sos && d < eos {
            days.push(d);
            values.push(ndvi.values[i]);
        }
    }
    days.push(eos);
    values.push(value_at(ndvi, eos));

    let peak_node = days.iter().position(|&d| d == pos).expect("peak anchor inside the season grid");
    let above: Vec<f64> = values.iter().map(|&v| (v - base_level).max(0.0)).collect();

    let large_integral = trapezoid(&days, &values);
    let biomass_indicator = trapezoid(&days[..=peak_node], &above[..=peak_node]);
    let yield_indicator = trapezoid(&days[peak_node..], &above[peak_node..]);
    let small_integral = biomass_indicator + yield_indicator;

    let y_pos = ndvi.values[pos_idx];
    Ok(SeasonMetrics {
        sos,
        pos,
        eos,
        rate_inc: (y_pos - values[0]) / (pos - sos),
        rate_dec: (y_pos - values[values.len() - 1]) / (eos - pos),
        large_integral,
        small_integral,
        biomass_indicator,
        yield_indicator,
        base_level,
    })
}
