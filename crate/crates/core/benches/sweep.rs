use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qforge::design::{sweep, Metric, SweepSpec};
use qforge::exec::Execution;
use qforge::model::NoiseEnvironment;

fn sweep_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("infidelity_sweep");
    group.sample_size(10);
    for n in [4usize, 8] {
        let spec = SweepSpec::new(4.5, n, n, NoiseEnvironment::first_unimon(), Metric::Infidelity);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let label = format!("{exec:?}").to_lowercase();
            group.bench_with_input(BenchmarkId::new(label, n * n), &spec, |b, spec| {
                b.iter(|| sweep(black_box(spec), exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep_modes);
criterion_main!(benches);
