use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kplab::smoothing::fit_a;
use kplab::solver::{nonlinear_step, solve_nonlinear, StepOptions};
use kplab::{Exec, Field, Grid, GridSpec, Profile, Scheme, SolveConfig};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn grid(n: usize, exec: Exec) -> Arc<Grid> {
    Arc::new(Grid::with_exec(n, n, 4.0 * PI, 4.0 * PI, exec).unwrap())
}

fn datum(g: &Arc<Grid>) -> Field {
    Profile::gaussian(1.0).build(g, 1e-3, 0).unwrap()
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("sheared_round_trip");
    for n in [128, 256] {
        for (name, exec) in POLICIES {
            let g = grid(n, exec);
            let samples = datum(&g).to_physical();
            group.bench_with_input(BenchmarkId::new(name, n), &samples, |b, s| {
                b.iter(|| Field::from_physical(&g, black_box(s), 0.7).unwrap().to_physical())
            });
        }
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonlinear_step");
    let opts = StepOptions::default();
    for n in [128, 256] {
        for (name, exec) in POLICIES {
            let v = datum(&grid(n, exec));
            group.bench_with_input(BenchmarkId::new(name, n), &v, |b, v| {
                b.iter(|| nonlinear_step(black_box(v), 1e-3, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn factorial_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_a");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let g = grid(128, exec);
        let mut cfg = SolveConfig::new(GridSpec::new(128, 128, 4.0 * PI, 4.0 * PI), 0.05, 5e-3, Scheme::ImexNonlinear);
        cfg.save_every = 2;
        let traj = solve_nonlinear(&datum(&g), &cfg).unwrap();
        group.bench_function(name, |b| b.iter(|| fit_a(black_box(&traj), 3.0, 6).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, transforms, steps, factorial_fit);
criterion_main!(benches);
