use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plc_core::fit::{self, model_eval_many, Dataset, FitConfig, ModelFamily};
use plc_core::sweep::{basin_grid, fates_batch};
use plc_core::{Execution, ModelParams, State};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn basin(c: &mut Criterion) {
    let p = ModelParams::new(0.6142, 2.6240, 2.1509, 4.2129).unwrap();
    let mut g = c.benchmark_group("basin_grid");
    g.sample_size(10);
    for n in [20, 40] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| basin_grid(black_box(&p), n, exec))
            });
        }
    }
    g.finish();
}

fn batch(c: &mut Criterion) {
    let p = ModelParams::new(1.0, 2.0, 1.0, 2.0).unwrap();
    let states: Vec<State> = (1..200)
        .map(|i| {
            let u = i as f64 / 200.0;
            State::new(u * 0.9, (1.0 - u) * 0.9).unwrap()
        })
        .collect();
    let mut g = c.benchmark_group("fates_batch");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| fates_batch(black_box(&p), &states, exec)));
    }
    g.finish();
}

fn multistart(c: &mut Criterion) {
    let times: Vec<f64> = (0..15).map(f64::from).collect();
    let v = model_eval_many(ModelFamily::Plc, &[0.6, 2.6, 2.1, 4.2, 0.01, 0.001], &times).unwrap();
    let data = Dataset::from_values("bench", &v).unwrap();
    let mut g = c.benchmark_group("plc_multistart");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = FitConfig {
            multistart: 8,
            exec,
            ..FitConfig::default()
        };
        g.bench_function(name, |b| b.iter(|| fit::fit(ModelFamily::Plc, black_box(&data), &cfg)));
    }
    g.finish();
}

criterion_group!(benches, basin, batch, multistart);
criterion_main!(benches);
