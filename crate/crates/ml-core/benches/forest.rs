use criterion::{criterion_group, criterion_main, Criterion};
use ml_core::{rf_fit, Dataset, Labels};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn fixture(n: usize, d: usize, classes: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        let row: Vec<f64> =
            (0..d).map(|f| (c * (f + 1)) as f64 * 0.5 + rng.gen_range(-1.0..1.0)).collect();
        x.push(row);
        y.push(c);
    }
    let names = (0..d).map(|f| format!("f{f}")).collect();
    Dataset::new(x, Labels::Class(y), names)
}

fn bench_forest(c: &mut Criterion) {
    let ds = fixture(2000, 16, 4);
    let mut g = c.benchmark_group("rf_fit_2000x16");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| rf_fit(&ds, 20, 8, 7, false).unwrap()));
    g.bench_function("parallel", |b| b.iter(|| rf_fit(&ds, 20, 8, 7, true).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_forest);
criterion_main!(benches);
