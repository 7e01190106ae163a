use crate::parcels::ParcelIdRaster;

/// Per-parcel erosion with a (2d+1)^2 square window. A pixel keeps its id only
/// if the whole window shares it; anything past the raster edge counts as -1,
/// so border pixels always erode for d >= 1. This gives the composition law
/// erode(a) . erode(b) == erode(a+b).
pub fn inward_buffer(ids: &ParcelIdRaster, d: usize) -> ParcelIdRaster {
    if d == 0 {
        return ids.clone();
    }
    let (w, h) = (ids.grid.width, ids.grid.height);
    let mut out = vec![-1i64; w * h];
    for row in 0..h {
        for col in 0..w {
            let id = ids.ids[row * w + col];
            if id < 0 {
                continue;
            }
            if row < d || col < d || row + d >= h || col + d >= w {
                continue; // window leaves the raster
            }
            let mut keep = true;
            'win: for r in row - d..=row + d {
                for c in col - d..=col + d {
                    if ids.ids[r * w + c] != id {
                        keep = false;
                        break 'win;
                    }
                }
            }
            if keep {
                out[row * w + col] = id;
            }
        }
    }
    ParcelIdRaster { grid: ids.grid.clone(), ids: out }
}

/// Dilation of a cloud/shadow mask with the same square window. Monotone:
/// every input true stays true.
pub fn outward_cloud_buffer(mask: &[bool], width: usize, height: usize, d: usize) -> Vec<bool> {
    assert_eq!(mask.len(), width * height, "mask shape");
    if d == 0 {
        return mask.to_vec();
    }
    let mut out = vec![false; mask.len()];
    for row in 0..height {
        for col in 0..width {
            if !mask[row * width + col] {
                continue;
            }
            let r0 = row.saturating_sub(d);
            let c0 = col.saturating_sub(d);
            let r1 = (row + d).min(height - 1);
            let c1 = (col + d).min(width - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    out[r * width + c] = true;
                }
            }
        }
    }
    out
}
