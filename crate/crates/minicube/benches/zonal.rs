use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use minicube::{zonal_stats, Cube, GridSpec, ParcelIdRaster, Reducer, ZonalMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(n_parcels: i64, side: usize) -> (Cube, ParcelIdRaster) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid = GridSpec::new(0.0, 0.0, 10.0, side, side).unwrap();
    let values: Vec<f64> = (0..side * side * 2)
        .map(|_| if rng.gen_bool(0.1) { f64::NAN } else { rng.gen_range(0.0..1.0) })
        .collect();
    let cube = Cube::new(grid.clone(), vec![100, 110], vec!["ndvi".into()], values).unwrap();
    let ids: Vec<i64> =
        (0..side * side).map(|_| if rng.gen_bool(0.1) { -1 } else { rng.gen_range(0..n_parcels) }).collect();
    (cube, ParcelIdRaster { grid, ids })
}

fn bench_zonal(c: &mut Criterion) {
    let (cube, ids) = fixture(1000, 128);
    let mut group = c.benchmark_group("zonal_1000_parcels");
    group.sample_size(10);
    group.bench_function("serial_oracle", |b| {
        b.iter_batched(
            || (),
            |_| zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::Serial, false).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("groupby_sequential", |b| {
        b.iter_batched(
            || (),
            |_| zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, false).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("groupby_parallel", |b| {
        b.iter_batched(
            || (),
            |_| zonal_stats(&cube, &ids, Reducer::Mean, ZonalMode::GroupBy, true).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_zonal);
criterion_main!(benches);
