//! Time-series preparation: interpolation to fixed anchors, resampling,
//! smoothing, thresholding, slopes, rolling accumulation.

mod io;

pub use io::{read_timeseries_csv, write_timeseries_csv, Reject, SeriesKey};

pub const DEFAULT_WINDOW_RADIUS: u32 = 5;
pub const DEFAULT_RESAMPLE_STEP: u32 = 10;
pub const DEFAULT_INTEGRAL_START: u32 = 100;
pub const DEFAULT_ACCUM_WINDOW: u32 = 7;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SitsError {
    #[error("not enough observations")]
    InsufficientData,
    #[error("window must be odd and fit the series")]
    InvalidWindow,
    #[error("lo must not exceed hi")]
    InvalidBounds,
    #[error("daily series has a gap or null at day {0}")]
    MissingDaily(u32),
}

/// Raw irregular trace; `None` marks masked/filtered observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub points: Vec<(u32, Option<f64>)>,
}

impl TimeSeries {
    pub fn new(points: Vec<(u32, Option<f64>)>) -> Self {
        assert!(points.windows(2).all(|w| w[0].0 < w[1].0), "days must strictly increase");
        TimeSeries { points }
    }
}

/// Gap-free series on explicit anchor days.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedStepSeries {
    pub anchor_days: Vec<u32>,
    pub values: Vec<f64>,
}

impl FixedStepSeries {
    pub fn new(anchor_days: Vec<u32>, values: Vec<f64>) -> Self {
        assert_eq!(anchor_days.len(), values.len(), "anchor/value length");
        assert!(anchor_days.windows(2).all(|w| w[0] < w[1]), "anchors must strictly increase");
        FixedStepSeries { anchor_days, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Linear fill of `None` holes over day abscissa, ends extended with the
/// nearest filled value. At least one entry must be filled.
fn fill_linear(days: &[u32], vals: &mut [Option<f64>]) -> Result<(), SitsError> {
    let filled: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_some()).collect();
    if filled.is_empty() {
        return Err(SitsError::InsufficientData);
    }
    for i in 0..vals.len() {
        if vals[i].is_some() {
            continue;
        }
        let next = filled.iter().find(|&&j| j > i);
        let prev = filled.iter().rev().find(|&&j| j < i);
        vals[i] = Some(match (prev, next) {
            (Some(&p), Some(&n)) => {
                let (vp, vn) = (vals[p].unwrap(), vals[n].unwrap());
                let t = (days[i] - days[p]) as f64 / (days[n] - days[p]) as f64;
                vp + (vn - vp) * t
            }
            (Some(&p), None) => vals[p].unwrap(),
            (None, Some(&n)) => vals[n].unwrap(),
            (None, None) => unreachable!(),
        });
    }
    Ok(())
}

/// Two-phase interpolation onto caller anchors. Phase 1 takes the
/// inverse-distance weighted mean (weight 1/(1+|day-anchor|)) of observations
/// within the window; an observation landing exactly on the anchor passes
/// through untouched. Phase 2 fills leftover anchors linearly, nearest value
/// at the ends.
pub fn interpolate_fixed_step(
    ts: &TimeSeries,
    anchors: &[u32],
    window_radius: u32,
) -> Result<FixedStepSeries, SitsError> {
    let obs: Vec<(u32, f64)> = ts.points.iter().filter_map(|&(d, v)| v.map(|v| (d, v))).collect();
    if obs.len() < 2 {
        return Err(SitsError::InsufficientData);
    }
    let mut vals: Vec<Option<f64>> = Vec::with_capacity(anchors.len());
    for &a in anchors {
        if let Some(&(_, v)) = obs.iter().find(|&&(d, _)| d == a) {
            vals.push(Some(v));
            continue;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for &(d, v) in &obs {
            let dist = d.abs_diff(a);
            if dist <= window_radius {
                let w = 1.0 / (1.0 + dist as f64);
                num += w * v;
                den += w;
            }
        }
        vals.push(if den > 0.0 { Some(num / den) } else { None });
    }
    fill_linear(anchors, &mut vals)?;
    Ok(FixedStepSeries::new(anchors.to_vec(), vals.into_iter().map(Option::unwrap).collect()))
}

/// Mean of the observations inside each consecutive `step`-day bin, bins
/// anchored at the first observed day; empty bins filled linearly.
pub fn resample_window_mean(ts: &TimeSeries, step: u32) -> Result<FixedStepSeries, SitsError> {
    assert!(step > 0, "step must be positive");
    let obs: Vec<(u32, f64)> = ts.points.iter().filter_map(|&(d, v)| v.map(|v| (d, v))).collect();
    if obs.is_empty() {
        return Err(SitsError::InsufficientData);
    }
    let first = obs[0].0;
    let last = obs[obs.len() - 1].0;
    let n_bins = ((last - first) / step + 1) as usize;
    let mut sums = vec![0.0f64; n_bins];
    let mut counts = vec![0usize; n_bins];
    for &(d, v) in &obs {
        let b = ((d - first) / step) as usize;
        sums[b] += v;
        counts[b] += 1;
    }
    let days: Vec<u32> = (0..n_bins).map(|b| first + b as u32 * step).collect();
    let mut vals: Vec<Option<f64>> =
        (0..n_bins).map(|b| (counts[b] > 0).then(|| sums[b] / counts[b] as f64)).collect();
    fill_linear(&days, &mut vals)?;
    Ok(FixedStepSeries::new(days, vals.into_iter().map(Option::unwrap).collect()))
}

/// Rolling median with symmetric shrink at the boundaries: the effective
/// radius at index i is min(w/2, i, n-1-i), so the window stays centered and
/// monotone inputs are fixed points.
pub fn rolling_median(fs: &FixedStepSeries, w: usize) -> Result<FixedStepSeries, SitsError> {
    if w % 2 == 0 || w == 0 || w > fs.len() {
        return Err(SitsError::InvalidWindow);
    }
    let h = w / 2;
    let n = fs.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let r = h.min(i).min(n - 1 - i);
        let mut win: Vec<f64> = fs.values[i - r..=i + r].to_vec();
        win.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push(win[r]);
    }
    Ok(FixedStepSeries::new(fs.anchor_days.clone(), out))
}

/// Null out observations outside [lo, hi].
pub fn threshold_filter(ts: &TimeSeries, lo: f64, hi: f64) -> Result<TimeSeries, SitsError> {
    if lo > hi {
        return Err(SitsError::InvalidBounds);
    }
    Ok(TimeSeries {
        points: ts
            .points
            .iter()
            .map(|&(d, v)| (d, v.filter(|x| (lo..=hi).contains(x))))
            .collect(),
    })
}

/// Backward difference over s anchor steps, divided by the actual day gap.
/// The first s entries drop out.
pub fn slope_series(fs: &FixedStepSeries, s: usize) -> Result<FixedStepSeries, SitsError> {
    assert!(s > 0, "s must be positive");
    if fs.len() <= s {
        return Err(SitsError::InsufficientData);
    }
    let mut days = Vec::with_capacity(fs.len() - s);
    let mut vals = Vec::with_capacity(fs.len() - s);
    for i in s..fs.len() {
        let dt = (fs.anchor_days[i] - fs.anchor_days[i - s]) as f64;
        days.push(fs.anchor_days[i]);
        vals.push((fs.values[i] - fs.values[i - s]) / dt);
    }
    Ok(FixedStepSeries::new(days, vals))
}

/// Running trapezoid integral in value*days, zero at the first anchor at or
/// after `start_day`; anchors before it read zero.
pub fn cumulative_integral(fs: &FixedStepSeries, start_day: u32) -> FixedStepSeries {
    let n = fs.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in 1..n {
        let (d0, d1) = (fs.anchor_days[i - 1], fs.anchor_days[i]);
        if d1 <= start_day {
            continue;
        }
        let (v0, v1) = (fs.values[i - 1], fs.values[i]);
        if d0 >= start_day {
            acc += (v0 + v1) / 2.0 * (d1 - d0) as f64;
        } else {
            // segment straddles start_day: integrate its right part only
            let t = (start_day - d0) as f64 / (d1 - d0) as f64;
            let v_at = v0 + (v1 - v0) * t;
            acc += (v_at + v1) / 2.0 * (d1 - start_day) as f64;
        }
        out[i] = acc;
    }
    FixedStepSeries::new(fs.anchor_days.clone(), out)
}

/// Sum of the trailing w days. The daily series must be gap-free and fully
/// observed between its first and last day; output starts once a full window
/// exists.
pub fn accumulate_window(daily: &TimeSeries, w: u32) -> Result<TimeSeries, SitsError> {
    assert!(w > 0, "window must be positive");
    if daily.points.is_empty() {
        return Err(SitsError::InsufficientData);
    }
    let first = daily.points[0].0;
    let last = daily.points[daily.points.len() - 1].0;
    let mut dense = Vec::with_capacity((last - first + 1) as usize);
    let mut iter = daily.points.iter().peekable();
    for day in first..=last {
        match iter.peek() {
            Some(&&(d, Some(v))) if d == day => {
                dense.push(v);
                iter.next();
            }
            _ => return Err(SitsError::MissingDaily(day)),
        }
    }
    if (dense.len() as u32) < w {
        return Err(SitsError::InsufficientData);
    }
    let mut points = Vec::new();
    let mut sum: f64 = dense[..w as usize - 1].iter().sum();
    for (i, &v) in dense.iter().enumerate().skip(w as usize - 1) {
        sum += v;
        points.push((first + i as u32, Some(sum)));
        sum -= dense[i + 1 - w as usize];
    }
    Ok(TimeSeries::new(points))
}
