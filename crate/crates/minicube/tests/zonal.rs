use minicube::{zonal_stats, Cube, CubeError, GridSpec, ParcelIdRaster, Reducer, ZonalMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube_2x2() -> (Cube, ParcelIdRaster) {
    let grid = GridSpec::new(0.0, 0.0, 1.0, 2, 2).unwrap();
    let cube = Cube::new(grid.clone(), vec![100], vec!["ndvi".into()], vec![1.0, 3.0, 5.0, 7.0]).unwrap();
    let ids = ParcelIdRaster { grid, ids: vec![0, 0, 1, -1] };
    (cube, ids)
}

#[test]
fn hand_example_means() {
    let (cube, ids) = cube_2x2();
    let rows = zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, false).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].parcel_id, 0);
    assert_eq!(rows[0].value, Some(2.0));
    assert_eq!(rows[1].parcel_id, 1);
    assert_eq!(rows[1].value, Some(5.0));
}

#[test]
fn all_null_parcel_emits_null() {
    let grid = GridSpec::new(0.0, 0.0, 1.0, 2, 1).unwrap();
    let cube = Cube::new(grid.clone(), vec![10], vec!["v".into()], vec![f64::NAN, 2.0]).unwrap();
    let ids = ParcelIdRaster { grid, ids: vec![5, 6] };
    let rows = zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, false).unwrap();
    assert_eq!(rows[0].value, None);
    assert_eq!(rows[1].value, Some(2.0));
}

#[test]
fn grid_mismatch_rejected() {
    let (cube, _) = cube_2x2();
    let other = GridSpec::new(0.0, 0.0, 2.0, 2, 2).unwrap();
    let ids = ParcelIdRaster { grid: other, ids: vec![-1; 4] };
    assert!(matches!(
        zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, false),
        Err(CubeError::GridMismatch)
    ));
}

fn random_case(seed: u64) -> (Cube, ParcelIdRaster) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(3..=24);
    let h = rng.gen_range(3..=24);
    let n_dates = rng.gen_range(1..=5);
    let n_vars = rng.gen_range(1..=3);
    let n_parcels = rng.gen_range(1..=12i64);
    let grid = GridSpec::new(0.0, 0.0, 1.0, w, h).unwrap();
    let mut dates: Vec<u32> = (0..n_dates).map(|_| rng.gen_range(1..=365)).collect();
    dates.sort_unstable();
    dates.dedup();
    let variables: Vec<String> = (0..n_vars).map(|v| format!("v{v}")).collect();
    let values: Vec<f64> = (0..dates.len() * n_vars * w * h)
        .map(|_| if rng.gen_bool(0.2) { f64::NAN } else { rng.gen_range(-3.0..3.0) })
        .collect();
    let cube = Cube::new(grid.clone(), dates, variables, values).unwrap();
    let ids: Vec<i64> =
        (0..w * h).map(|_| if rng.gen_bool(0.25) { -1 } else { rng.gen_range(0..n_parcels) }).collect();
    (cube, ParcelIdRaster { grid, ids })
}

#[test]
fn groupby_equals_serial_bit_exactly() {
    for seed in 0..8 {
        let (cube, ids) = random_case(seed);
        for reducer in [Reducer::Mean, Reducer::Min, Reducer::Max, Reducer::Count] {
            let a = zonal_stats(&cube, &ids, reducer, ZonalMode::GroupBy, false).unwrap();
            let b = zonal_stats(&cube, &ids, reducer, ZonalMode::Serial, false).unwrap();
            assert_eq!(a, b, "seed {seed}, {reducer:?}");
        }
    }
}

#[test]
fn parallel_equals_sequential() {
    for seed in [3, 17] {
        let (cube, ids) = random_case(seed);
        let seq = zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, false).unwrap();
        let par = zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, true).unwrap();
        assert_eq!(seq, par);
    }
}

#[test]
fn count_conserves_valid_pixels() {
    for seed in [1, 9] {
        let (cube, ids) = random_case(seed);
        let rows = zonal_stats(&cube, &ids, Reducer::Count, ZonalMode::GroupBy, false).unwrap();
        for (t, &date) in cube.dates.iter().enumerate() {
            for (v, var) in cube.variables.iter().enumerate() {
                let total: f64 = rows
                    .iter()
                    .filter(|r| r.date == date && &r.variable == var)
                    .filter_map(|r| r.value)
                    .sum();
                let slice = cube.slice(t, v);
                let direct = slice
                    .iter()
                    .zip(&ids.ids)
                    .filter(|(x, &id)| id >= 0 && !x.is_nan())
                    .count();
                assert_eq!(total, direct as f64, "seed {seed} slice ({date},{var})");
            }
        }
    }
}
