use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sympara_bench::{spin_orbit, spin_orbit_grid, spin_orbit_start};
use sympara_core::{builtin_scheme, run, CorrectorKind, PropagatorPair, Schedule};

fn bench_run(c: &mut Criterion) {
    let system = spin_orbit();
    let z = spin_orbit_start();
    let grid = spin_orbit_grid();
    let pair = PropagatorPair::matched(builtin_scheme("yoshida8").unwrap()).unwrap();
    let mut group = c.benchmark_group("parareal/spin-orbit");
    group.sample_size(10);
    for threads in [1, 4] {
        let schedule = Schedule::with_threads(threads).unwrap();
        group.bench_with_input(BenchmarkId::new("threads", threads), &schedule, |b, s| {
            b.iter(|| run(&pair, &system, &z, &grid, &CorrectorKind::PureParareal, 1e-10, 32, s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_run);
criterion_main!(benches);
