use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pinlab_core::flat_percolation::{build_lambda_with, sample_lattice, GrowthFunction, Schedule};
use std::hint::black_box;

fn lambda(c: &mut Criterion) {
    let h = GrowthFunction::new(0.5).unwrap();
    let mut group = c.benchmark_group("build_lambda");
    for width in [256, 1024] {
        let lat = sample_lattice(1, width, 64, 0.97, 3).unwrap();
        for (name, schedule) in [("sweep", Schedule::Sweep), ("worklist", Schedule::Worklist)] {
            group.bench_with_input(BenchmarkId::new(name, width), &lat, |b, lat| {
                b.iter(|| build_lambda_with(black_box(lat), &h, schedule))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, lambda);
criterion_main!(benches);
