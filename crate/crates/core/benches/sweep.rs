use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gonal_core::experiments::{run_trial, sweep, Analyses, GridSpec, ScaledPoint, SweepConfig, TrialOptions};
use gonal_core::model::ModelParams;
use gonal_core::ModelKind;

fn config(threads: Option<usize>) -> SweepConfig {
    SweepConfig {
        m: vec![60],
        ell: 3,
        model: ModelKind::Binomial,
        grid: GridSpec {
            scaled: Some(vec![
                ScaledPoint { c: 0.1, a: 0.0 },
                ScaledPoint { c: 1.0, a: 1.0 },
                ScaledPoint { c: 10.0, a: 1.0 },
            ]),
            ..GridSpec::default()
        },
        trials: 24,
        seed: 1,
        epsilon: 0.01,
        analyses: Analyses::default(),
        budgets: Default::default(),
        threads,
    }
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    // threads = 1 takes the sequential path even with the parallel feature.
    for (name, threads) in [("sequential", Some(1)), ("parallel", Some(cores))] {
        let cfg = config(threads);
        group.bench_with_input(BenchmarkId::new(name, cores), &cfg, |b, cfg| {
            b.iter(|| sweep(cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_trial(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial");
    group.sample_size(10);
    for m in [100u32, 1000] {
        let mf = f64::from(m);
        let params = ModelParams::probability(m, 3, 5.0 * mf.ln() / (mf * mf), 3);
        group.bench_with_input(BenchmarkId::new("binomial_l3", m), &params, |b, params| {
            b.iter(|| run_trial(ModelKind::Binomial, params, 0, &TrialOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_trial);
criterion_main!(benches);
