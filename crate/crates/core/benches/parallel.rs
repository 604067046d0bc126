//! Rayon against the plain loop on the two heaviest data-parallel stages:
//! assembling X(n) equations and building density blocks from ω.
//!
//! With one core the two should tie; the gap on more cores is the payoff.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use xxxdm::numerics::Precision;
use xxxdm::omega_exact::omega_zero;
use xxxdm::pipeline::{density_report, word_tables};
use xxxdm::xsolver::{solve_x, Problem, ScheduleMode};
use xxxdm::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_x");
    g.sample_size(10);
    let p = Problem::new(5);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 5), &exec, |b, &exec| {
            b.iter(|| solve_x(&p, &ScheduleMode::default(), 1, exec).unwrap())
        });
    }
    g.finish();
}

fn density(c: &mut Criterion) {
    let mut g = c.benchmark_group("density");
    g.sample_size(10);
    let prec = Precision::new(30);
    let (tables, _) = word_tables(5, &ScheduleMode::default(), 1, Exec::Parallel).unwrap();
    let omega = omega_zero(10, prec);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 5), &exec, |b, &exec| {
            b.iter(|| density_report(5, &tables, &omega, prec.bits(), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, solve, density);
criterion_main!(benches);
