use minicube::{inward_buffer, outward_cloud_buffer, GridSpec, ParcelIdRaster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raster(w: usize, h: usize, ids: Vec<i64>) -> ParcelIdRaster {
    ParcelIdRaster { grid: GridSpec::new(0.0, 0.0, 1.0, w, h).unwrap(), ids }
}

#[test]
fn zero_buffer_is_identity() {
    let r = raster(3, 3, vec![1, 1, 1, 1, 2, 1, -1, 1, 1]);
    assert_eq!(inward_buffer(&r, 0), r);
    let mask = vec![true, false, true, false];
    assert_eq!(outward_cloud_buffer(&mask, 2, 2, 0), mask);
}

#[test]
fn block_erodes_to_center() {
    // 3x3 block of id 4 inside a 5x5 raster
    let mut ids = vec![-1i64; 25];
    for r in 1..4 {
        for c in 1..4 {
            ids[r * 5 + c] = 4;
        }
    }
    let out = inward_buffer(&raster(5, 5, ids), 1);
    let mut want = vec![-1i64; 25];
    want[2 * 5 + 2] = 4;
    assert_eq!(out.ids, want);
}

#[test]
fn thin_strip_vanishes() {
    // 2-pixel-wide strip cannot survive d=1
    let mut ids = vec![-1i64; 30];
    for r in 0..6 {
        ids[r * 5 + 1] = 8;
        ids[r * 5 + 2] = 8;
    }
    let out = inward_buffer(&raster(5, 6, ids), 1);
    assert!(out.ids.iter().all(|&id| id == -1));
}

#[test]
fn single_cloud_pixel_dilates_to_block() {
    let mut mask = vec![false; 25];
    mask[2 * 5 + 2] = true;
    let out = outward_cloud_buffer(&mask, 5, 5, 1);
    for r in 0..5 {
        for c in 0..5 {
            let want = (1..=3).contains(&r) && (1..=3).contains(&c);
            assert_eq!(out[r * 5 + c], want, "({r},{c})");
        }
    }
}

#[test]
fn saturated_mask_stays_saturated() {
    let mask = vec![true; 12];
    assert_eq!(outward_cloud_buffer(&mask, 4, 3, 2), mask);
}

#[test]
fn dilation_contains_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mask: Vec<bool> = (0..9 * 7).map(|_| rng.gen_bool(0.3)).collect();
    let out = outward_cloud_buffer(&mask, 9, 7, 2);
    for (i, &m) in mask.iter().enumerate() {
        assert!(!m || out[i]);
    }
}

#[test]
fn buffers_compose_additively() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ids: Vec<i64> =
        (0..16 * 12).map(|_| if rng.gen_bool(0.3) { -1 } else { rng.gen_range(0..4) }).collect();
    let r = raster(16, 12, ids);
    for (a, b) in [(1usize, 1usize), (1, 2), (2, 1)] {
        let two_step = inward_buffer(&inward_buffer(&r, a), b);
        let one_step = inward_buffer(&r, a + b);
        assert_eq!(two_step, one_step, "erode {a}+{b}");
    }
    let mask: Vec<bool> = (0..16 * 12).map(|_| rng.gen_bool(0.15)).collect();
    for (a, b) in [(1usize, 2usize), (2, 1)] {
        let two_step = outward_cloud_buffer(&outward_cloud_buffer(&mask, 16, 12, a), 16, 12, b);
        let one_step = outward_cloud_buffer(&mask, 16, 12, a + b);
        assert_eq!(two_step, one_step, "dilate {a}+{b}");
    }
}
