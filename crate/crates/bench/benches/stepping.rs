use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use symparc::fput::experiment_energy;
use symparc::SolverMode;
use symparc_bench::{fput_fixture, stepper};

fn single_step(c: &mut Criterion) {
    let fx = fput_fixture(50.0);
    let mut group = c.benchmark_group("fput_step");
    for name in ["lgl2", "lgl4", "lgl6", "lglc6", "imex-yoshida4", "imex-yoshida6"] {
        let mut st = stepper(name, SolverMode::LinearlyImplicit);
        group.bench_function(BenchmarkId::new("linearly_implicit", name), |b| {
            b.iter(|| st.step(&fx.system, black_box(&fx.state), 0.04).unwrap())
        });
    }
    // fixed point only converges for small hω
    for name in ["lgl4", "lgl6"] {
        let mut st = stepper(name, SolverMode::FixedPoint);
        group.bench_function(BenchmarkId::new("fixed_point", name), |b| {
            b.iter(|| st.step(&fx.system, black_box(&fx.state), 0.004).unwrap())
        });
    }
    group.finish();
}

fn energy_run(c: &mut Criterion) {
    let fx = fput_fixture(50.0);
    let mut group = c.benchmark_group("fput_energy_T20");
    group.sample_size(20);
    for name in ["lgl4", "imex-yoshida4"] {
        let mut st = stepper(name, SolverMode::LinearlyImplicit);
        group.bench_function(name, |b| {
            b.iter(|| experiment_energy(&mut st, &fx.params, 0.04, 20.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_step, energy_run);
criterion_main!(benches);
