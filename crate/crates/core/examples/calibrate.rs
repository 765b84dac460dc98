//! Measures the regression constants pinned in the test suites.
//!
//! cargo run --release -p sympara-core --example calibrate

use sympara_core::diagnostics::energy_error_series;
use sympara_core::integrators::order_study;
use sympara_core::{
    builtin_scheme, compare_coarse_choices, energy_oscillation, integrate, make_harmonic_oscillator, make_pendulum,
    make_spin_orbit, PhaseState, Schedule, SpinOrbitParams, TwoLevelGrid, CATALOG_NAMES,
};

fn main() {
    let ho = make_harmonic_oscillator(1.0).unwrap();
    let z = PhaseState::scalar(1.0, 0.0).unwrap();
    println!("# empirical order on the harmonic oscillator, t_end = 8");
    for name in CATALOG_NAMES {
        let s = builtin_scheme(name).unwrap();
        let taus = order_taus(s.nominal_order());
        let study = order_study(&s, &ho, &z, 8.0, &taus).unwrap();
        println!(
            "{name:12} taus={taus:?} errors={:?} slope={:.4}",
            study.errors, study.slope
        );
    }

    let pend = make_pendulum(0.1);
    let z = PhaseState::scalar(0.8, 0.0).unwrap();
    let lf = builtin_scheme("leapfrog").unwrap();
    println!("# leapfrog pendulum eps=0.1 from (0.8, 0)");
    for (tau, n) in [(0.1, 100_000usize), (0.05, 200_000)] {
        let traj = integrate(&lf, &pend, &z, tau, n).unwrap();
        let series = energy_error_series(&traj, &pend).unwrap();
        println!(
            "tau={tau} steps={n} osc={:.6e} osc/tau^2={:.6e} drift_rate={:.3e}",
            series.oscillation(),
            series.oscillation() / (tau * tau),
            series.drift_rate()
        );
    }
    let o1 = energy_oscillation(&lf, &pend, &z, 0.1, 10_000).unwrap();
    let o2 = energy_oscillation(&lf, &pend, &z, 0.05, 20_000).unwrap();
    println!("osc(0.1, 1e4 steps)={o1:.6e} C={:.6e} ratio={:.4}", o1 / 0.01, o1 / o2);

    let so = make_spin_orbit(SpinOrbitParams::new(0.1, 0.01, 0.2).unwrap());
    let z = PhaseState::scalar(0.8, 0.0).unwrap();
    let grid = TwoLevelGrid::new(32.0, 32, 128).unwrap();
    let fine = builtin_scheme("yoshida8").unwrap();
    let candidates: Vec<_> = ["yoshida8", "lie-trotter", "leapfrog", "yoshida4", "saba2", "sbab2"]
        .iter()
        .map(|n| builtin_scheme(n).unwrap())
        .collect();
    for tol in [1e-8, 1e-10] {
        println!("# spin-orbit parareal, fine yoshida8, tol={tol}");
        let table = compare_coarse_choices(&fine, &candidates, &so, &z, &grid, tol, 32, &Schedule::Serial).unwrap();
        for row in table.rows {
            let o = row.outcome.unwrap();
            println!(
                "{:12} converged_at={:?} surrogate={:.6e} defects={:?}",
                row.scheme,
                o.converged_at,
                o.surrogate_length,
                o.defects.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
            );
        }
    }

    let grid = TwoLevelGrid::new(5.0, 10, 50).unwrap();
    let z = PhaseState::scalar(1.0, 0.0).unwrap();
    println!("# harmonic parareal, fine leapfrog dt=0.01, Dt=0.5");
    let cands: Vec<_> = ["leapfrog", "lie-trotter"]
        .iter()
        .map(|n| builtin_scheme(n).unwrap())
        .collect();
    let table = compare_coarse_choices(&lf, &cands, &ho, &z, &grid, 1e-10, 10, &Schedule::Serial).unwrap();
    for row in table.rows {
        let o = row.outcome.unwrap();
        println!(
            "{:12} converged_at={:?} defects={:?}",
            row.scheme,
            o.converged_at,
            o.defects.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        );
    }
}

fn order_taus(order: u32) -> Vec<f64> {
    match order {
        1 | 2 => vec![0.1, 0.05, 0.025, 0.0125],
        4 => vec![0.2, 0.1, 0.05, 0.025],
        _ => vec![0.5, 0.25, 0.125, 0.0625],
    }
}
