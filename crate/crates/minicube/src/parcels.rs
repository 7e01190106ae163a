use std::collections::BTreeMap;

use crate::cube::GridSpec;
use crate::CubeError;

/// One declared parcel. `rings` are planar coordinate loops tested with
/// even-odd parity, so holes and multi-part geometries are just extra rings.
#[derive(Debug, Clone)]
pub struct Parcel {
    pub rings: Vec<Vec<(f64, f64)>>,
    pub crop_code: String,
    pub farmer_id: String,
    pub area_ha: f64,
}

impl Parcel {
    /// Shoelace area over all rings, in ha. Holes must wind opposite to shells.
    pub fn polygon_area_ha(rings: &[Vec<(f64, f64)>]) -> f64 {
        let mut twice: f64 = 0.0;
        for ring in rings {
            let n = ring.len();
            for i in 0..n {
                let (x0, y0) = ring[i];
                let (x1, y1) = ring[(i + 1) % n];
                twice += x0 * y1 - x1 * y0;
            }
        }
        twice.abs() / 2.0 / 10_000.0
    }
}

pub type ParcelSet = BTreeMap<i64, Parcel>;

/// Integer id per pixel, -1 where no parcel claims the center.
#[derive(Debug, Clone, PartialEq)]
pub struct ParcelIdRaster {
    pub grid: GridSpec,
    pub ids: Vec<i64>,
}

fn validate_rings(id: i64, rings: &[Vec<(f64, f64)>]) -> Result<(), CubeError> {
    if rings.is_empty() {
        return Err(CubeError::InvalidGeometry(format!("parcel {id}: no rings")));
    }
    for ring in rings {
        // tolerate an explicit closing vertex
        let n = if ring.len() > 1 && ring.first() == ring.last() {
            ring.len() - 1
        } else {
            ring.len()
        };
        if n < 3 {
            return Err(CubeError::InvalidGeometry(format!("parcel {id}: ring with {n} vertices")));
        }
        if ring.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(CubeError::InvalidGeometry(format!("parcel {id}: non-finite coordinate")));
        }
    }
    Ok(())
}

/// Even-odd ray cast over every ring.
fn point_in_rings(px: f64, py: f64, rings: &[Vec<(f64, f64)>]) -> bool {
    let mut inside = false;
    for ring in rings {
        let n = ring.len();
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = ring[i];
            let (xj, yj) = ring[j];
            if (yi > py) != (yj > py) {
                let x_cross = xi + (py - yi) / (yj - yi) * (xj - xi);
                if px < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
    }
    inside
}

/// Pixel gets the id of the lowest-numbered parcel whose polygon contains its
/// center; everything else stays -1.
pub fn rasterize_parcels(parcels: &ParcelSet, grid: &GridSpec) -> Result<ParcelIdRaster, CubeError> {
    let mut ids = vec![-1i64; grid.len()];
    // BTreeMap iterates ascending, so the first parcel to claim a pixel wins
    // and the lowest-id tie-break falls out of the scan order.
    for (&id, parcel) in parcels {
        validate_rings(id, &parcel.rings)?;
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for ring in &parcel.rings {
            for &(x, y) in ring {
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
        }
        let col_of = |x: f64| ((x - grid.origin_x) / grid.pixel_size - 0.5).ceil().max(0.0) as usize;
        let row_of = |y: f64| ((y - grid.origin_y) / grid.pixel_size - 0.5).ceil().max(0.0) as usize;
        let c0 = col_of(min_x);
        let r0 = row_of(min_y);
        for row in r0..grid.height {
            let (_, cy) = grid.pixel_center(row, 0);
            if cy > max_y {
                break;
            }
            for col in c0..grid.width {
                let (cx, cy) = grid.pixel_center(row, col);
                if cx > max_x {
                    break;
                }
                let at = row * grid.width + col;
                if ids[at] == -1 && point_in_rings(cx, cy, &parcel.rings) {
                    ids[at] = id;
                }
            }
        }
    }
    Ok(ParcelIdRaster { grid: grid.clone(), ids })
}
