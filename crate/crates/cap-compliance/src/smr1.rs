use crate::CapError;

pub const DEFAULT_BUFFER_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Risk {
    Low,
    High,
}

impl Risk {
    pub fn name(self) -> &'static str {
        match self {
            Risk::Low => "low",
            Risk::High => "high",
        }
    }
}

/// Parcel geometry plus the terrain attributes the rule gates on. Rings are
/// closed implicitly; coordinates are planar meters.
#[derive(Debug, Clone)]
pub struct Smr1Parcel {
    pub rings: Vec<Vec<(f64, f64)>>,
    pub slope_deg: f64,
    pub aspect_deg: f64,
}

/// Mutual closest approach between a parcel boundary and the water set.
/// The bearing runs from the parcel point toward the water point, compass
/// degrees in [0, 360).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proximity {
    pub distance: f64,
    pub bearing_deg: f64,
}

type P = (f64, f64);

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: P, b: P) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dist(a: P, b: P) -> f64 {
    let d = sub(a, b);
    (d.0 * d.0 + d.1 * d.1).sqrt()
}

/// Closest point to `p` on segment ab.
fn point_on_segment(p: P, a: P, b: P) -> P {
    let ab = sub(b, a);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    if len2 == 0.0 {
        return a;
    }
    let t = ((sub(p, a).0 * ab.0 + sub(p, a).1 * ab.1) / len2).clamp(0.0, 1.0);
    (a.0 + t * ab.0, a.1 + t * ab.1)
}

fn proper_crossing(a: P, b: P, c: P, d: P) -> Option<P> {
    let r = sub(b, a);
    let s = sub(d, c);
    let denom = cross(r, s);
    if denom == 0.0 {
        return None;
    }
    let t = cross(sub(c, a), s) / denom;
    let u = cross(sub(c, a), r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((a.0 + t * r.0, a.1 + t * r.1))
    } else {
        None
    }
}

/// Closest pair between two segments: (distance, point on ab, point on cd).
fn seg_seg(a: P, b: P, c: P, d: P) -> (f64, P, P) {
    if let Some(x) = proper_crossing(a, b, c, d) {
        return (0.0, x, x);
    }
    let candidates = [
        (a, point_on_segment(a, c, d), false),
        (b, point_on_segment(b, c, d), false),
        (c, point_on_segment(c, a, b), true),
        (d, point_on_segment(d, a, b), true),
    ];
    let mut best = (f64::INFINITY, a, c);
    for (p, q, swapped) in candidates {
        let dd = dist(p, q);
        if dd < best.0 {
            best = if swapped { (dd, q, p) } else { (dd, p, q) };
        }
    }
    best
}

fn ring_segments(ring: &[P]) -> Vec<(P, P)> {
    match ring.len() {
        0 => Vec::new(),
        1 => vec![(ring[0], ring[0])],
        n => (0..n).map(|i| (ring[i], ring[(i + 1) % n])).collect(),
    }
}

fn chain_segments(chain: &[P]) -> Vec<(P, P)> {
    match chain.len() {
        0 => Vec::new(),
        1 => vec![(chain[0], chain[0])],
        _ => chain.windows(2).map(|w| (w[0], w[1])).collect(),
    }
}

/// Compass bearing of the proximity line at the mutual closest points.
pub fn proximity(parcel_rings: &[Vec<P>], waters: &[Vec<P>]) -> Option<Proximity> {
    let parcel_segs: Vec<(P, P)> = parcel_rings.iter().flat_map(|r| ring_segments(r)).collect();
    let water_segs: Vec<(P, P)> = waters.iter().flat_map(|c| chain_segments(c)).collect();
    if parcel_segs.is_empty() || water_segs.is_empty() {
        return None;
    }
    let mut best: Option<(f64, P, P)> = None;
    for &(a, b) in &parcel_segs {
        for &(c, d) in &water_segs {
            let got = seg_seg(a, b, c, d);
            if best.map_or(true, |(bd, _, _)| got.0 < bd) {
                best = Some(got);
            }
        }
    }
    let (distance, p, w) = best.unwrap();
    let bearing = (w.0 - p.0).atan2(w.1 - p.1).to_degrees().rem_euclid(360.0);
    Some(Proximity { distance, bearing_deg: bearing })
}

fn bearing_in_window(bearing: f64, aspect: f64) -> bool {
    let lo = (aspect - 45.0).rem_euclid(360.0);
    let hi = (aspect + 45.0).rem_euclid(360.0);
    if lo < hi {
        bearing > lo && bearing < hi
    } else {
        bearing > lo || bearing < hi
    }
}

/// Nitrate-runoff exposure: high only when the parcel sits within the water
/// buffer, is steeper than 12 degrees, and drains toward the water (the
/// proximity-line bearing falls strictly inside aspect +- 45 degrees).
pub fn smr1_check(
    parcel: &Smr1Parcel,
    waters: &[Vec<P>],
    buffer_m: f64,
) -> Result<Risk, CapError> {
    if waters.iter().all(|c| c.is_empty()) {
        return Err(CapError::NoWaterData);
    }
    let prox = proximity(&parcel.rings, waters)
        .ok_or_else(|| CapError::Parse("parcel has no boundary geometry".to_string()))?;
    let high = prox.distance <= buffer_m
        && parcel.slope_deg > 12.0
        && bearing_in_window(prox.bearing_deg, parcel.aspect_deg);
    Ok(if high { Risk::High } else { Risk::Low })
}
