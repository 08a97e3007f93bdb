//! Parallel core against a single worker on the same workloads.
//!
//! With the default `parallel` feature each workload runs twice: inside a
//! one-thread pool and on the global pool. Built with
//! `--no-default-features` only the sequential fallback is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use thermocav::forward::{ntd_matrix, CavityModel, EmptyModel};
use thermocav::geometry::Scenario;
use thermocav::sampling::{indicator_sweep, RegularizationConfig, SamplingGrid, SweepConfig};

fn benchmark(n: usize) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{"outer": {{"kind": "circle", "center": [0, 0], "radius": 1.0}},
        "cavity": {{"kind": "circle", "center": [0, 0], "radius": 0.4}},
        "lambda": 1.0, "T": 2.0, "N_s_outer": {n}, "N_s_inner": {}, "N_t": {n}}}"#,
        n * 3 / 4
    ))
    .unwrap()
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    vec![("one_thread", Some(rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())), ("pool", None)]
}

#[cfg(not(feature = "parallel"))]
fn modes() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

#[cfg(feature = "parallel")]
fn within<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn within<R>(_: &Option<()>, f: impl FnOnce() -> R) -> R {
    f()
}

fn assembly(c: &mut Criterion) {
    let s = benchmark(24);
    let mut group = c.benchmark_group("ntd_assembly");
    group.sample_size(10);
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::new(name, 24), |b| b.iter(|| within(&pool, || ntd_matrix(&s, true).unwrap())));
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let s = benchmark(24);
    let measured = CavityModel::from_scenario(&s).unwrap().ntd_indirect().unwrap();
    let gap = measured.gap(&EmptyModel::from_scenario(&s).unwrap().ntd().unwrap()).unwrap();
    let blind = s.blind();
    let grid = SamplingGrid::square(-0.8, 0.8, -0.8, 9).unwrap();
    let cfg = SweepConfig::defaults(s.horizon, &grid, RegularizationConfig::fixed(1e-6));
    let mut group = c.benchmark_group("indicator_sweep");
    group.sample_size(10);
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::new(name, 81), |b| {
            b.iter(|| within(&pool, || indicator_sweep(&blind, &gap, &grid, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, sweep);
criterion_main!(benches);
