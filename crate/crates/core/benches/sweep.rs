//! Parallel-vs-sequential throughput of the sweep runner, plus a per-step
//! microbenchmark. With `--no-default-features` only the sequential path is
//! compiled and benchmarked.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use lie_momentum::exec;
use lie_momentum::experiment::{run_single, InitMode, RunConfig, SweepConfig};
use lie_momentum::optimizer::{select_params, step, OptimizerState, Scheme};
use lie_momentum::potential::{sample_haar_rotation, BrockettPotential, SpectrumSpec};

fn mini_tasks(cfg: &SweepConfig) -> Vec<RunConfig> {
    let mut tasks = Vec::new();
    for &kappa in &cfg.kappas {
        for s in 0..cfg.seeds_per_point {
            for &scheme in &cfg.schemes {
                let mut rc = RunConfig::new(cfg.n, kappa, cfg.seed + s as u64, scheme);
                rc.eps = cfg.eps;
                rc.max_iters = cfg.max_iters;
                rc.init = cfg.init;
                rc.trace_stride = None;
                rc.series_stride = cfg.series_stride;
                tasks.push(rc);
            }
        }
    }
    tasks
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = SweepConfig {
        n: 6,
        kappas: vec![50.0, 100.0],
        schemes: vec![Scheme::HeavyBall, Scheme::NagSc],
        seed: 3,
        seeds_per_point: 2,
        max_iters: 30_000,
        eps: 1e-8,
        init: InitMode::default(),
        a: std::f64::consts::PI,
        series_stride: 8,
    };
    let tasks = mini_tasks(&cfg);

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("serial", |b| {
        b.iter(|| {
            let out = exec::map_serial(black_box(tasks.clone()), |rc| {
                run_single(&rc).map(|o| o.iterations).unwrap_or(0)
            });
            black_box(out)
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let out = exec::map_tasks(black_box(tasks.clone()), |rc| {
                run_single(&rc).map(|o| o.iterations).unwrap_or(0)
            });
            black_box(out)
        })
    });
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let pot =
        BrockettPotential::from_spectrum(&SpectrumSpec::new(10, 1e4).unwrap(), 5).unwrap();
    let est = pot.local_smoothness().unwrap();
    let params = select_params(est.l, est.mu, Scheme::HeavyBall, std::f64::consts::PI).unwrap();
    let state = OptimizerState::new(sample_haar_rotation(10, 6));
    c.bench_function("heavy_ball_step_n10", |b| {
        b.iter(|| black_box(step(black_box(&state), &pot, &params)))
    });
}

criterion_group!(benches, bench_sweep, bench_step);
criterion_main!(benches);
