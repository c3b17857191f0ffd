use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use supersinglet::bell::{maximize_violation, ClosedForm, OptimizerConfig};
use supersinglet::exec::Execution;
use supersinglet::observables::{correlation_sweep, Family};
use supersinglet::protocols::{cheat_calibration, fabrication_calibration};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn optimizer(c: &mut Criterion) {
    let mut g = c.benchmark_group("maximize_violation");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = OptimizerConfig { exec, ..Default::default() };
        g.bench_with_input(BenchmarkId::new(name, "n=1000 m=2"), &cfg, |b, cfg| {
            b.iter(|| maximize_violation(black_box(1000), 2, &ClosedForm, cfg).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let thetas: Vec<f64> = (0..64).map(|i| i as f64 * 0.1).collect();
    let mut g = c.benchmark_group("correlation_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "n=5..6"), |b| {
            b.iter(|| correlation_sweep(&[5, 6], &[Family::M1, Family::M2], black_box(&thetas), exec).unwrap())
        });
    }
    g.finish();
}

fn trials(c: &mut Criterion) {
    let mut g = c.benchmark_group("protocol_trials");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "cheat n=6 x 5000"), |b| {
            b.iter(|| cheat_calibration(6, black_box(5000), 1, exec).unwrap())
        });
        g.bench_function(BenchmarkId::new(name, "fabrication k=3 x 2000"), |b| {
            b.iter(|| fabrication_calibration(3, 300, black_box(2000), 1, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, optimizer, sweep, trials);
criterion_main!(benches);
