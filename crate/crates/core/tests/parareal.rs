use sympara_core::parareal::{sequential_fine, StopReason};
use sympara_core::{
    builtin_scheme, compare_coarse_choices, initial_guess, make_harmonic_oscillator, make_spin_orbit, matched_coarse,
    parareal_iterate, run, CorrectorKind, IterationRecord, PhaseState, PropagatorPair, Schedule, SeparableSystem,
    SpinOrbitParams, TwoLevelGrid,
};

fn spin_orbit() -> SeparableSystem {
    make_spin_orbit(SpinOrbitParams::new(0.1, 0.01, 0.2).unwrap())
}

fn start() -> PhaseState {
    PhaseState::scalar(0.8, 0.0).unwrap()
}

fn all_iterations(
    pair: &PropagatorPair,
    sys: &SeparableSystem,
    y0: &PhaseState,
    grid: &TwoLevelGrid,
    count: usize,
) -> Vec<IterationRecord> {
    let mut its = vec![initial_guess(pair, sys, y0, grid).unwrap()];
    for _ in 0..count {
        let next = parareal_iterate(
            pair,
            sys,
            its.last().unwrap(),
            grid,
            &CorrectorKind::PureParareal,
            &Schedule::Serial,
        )
        .unwrap();
        its.push(next);
    }
    its
}

fn check_exactness(pair: &PropagatorPair, sys: &SeparableSystem, y0: &PhaseState, grid: &TwoLevelGrid) {
    let reference = sequential_fine(pair, sys, y0, grid).unwrap();
    let its = all_iterations(pair, sys, y0, grid, grid.n_branches());
    for (k, it) in its.iter().enumerate() {
        for (n, (z, r)) in it.node_states.iter().zip(&reference).enumerate().take(k + 1) {
            let d = z.distance(r);
            assert!(d <= 1e-12, "{}: k={k} n={n} off by {d:e}", sys.name());
        }
    }
}

#[test]
fn exactness_on_the_oscillator() {
    let ho = make_harmonic_oscillator(1.0).unwrap();
    let pair = PropagatorPair::matched(builtin_scheme("leapfrog").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(5.0, 10, 50).unwrap();
    check_exactness(&pair, &ho, &PhaseState::scalar(1.0, 0.0).unwrap(), &grid);
}

#[test]
fn exactness_on_spin_orbit() {
    let pair = PropagatorPair::matched(builtin_scheme("yoshida4").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(8.0, 8, 32).unwrap();
    check_exactness(&pair, &spin_orbit(), &start(), &grid);
}

#[test]
fn exactness_with_an_unsymmetric_coarse() {
    let pair = PropagatorPair::unchecked(
        builtin_scheme("leapfrog").unwrap(),
        builtin_scheme("lie-trotter").unwrap(),
    );
    let grid = TwoLevelGrid::new(6.0, 6, 20).unwrap();
    check_exactness(&pair, &spin_orbit(), &start(), &grid);
}

#[test]
fn thread_count_does_not_change_results() {
    let sys = spin_orbit();
    let pair = PropagatorPair::matched(builtin_scheme("yoshida8").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(16.0, 16, 64).unwrap();
    let go = |schedule: &Schedule| {
        run(
            &pair,
            &sys,
            &start(),
            &grid,
            &CorrectorKind::PureParareal,
            1e-12,
            16,
            schedule,
        )
        .unwrap()
    };
    let serial = go(&Schedule::Serial);
    for threads in [2, 4, 8] {
        assert_eq!(
            go(&Schedule::with_threads(threads).unwrap()),
            serial,
            "{threads} threads"
        );
    }
}

#[test]
fn first_node_is_pinned_every_iteration() {
    let sys = spin_orbit();
    let pair = PropagatorPair::matched(builtin_scheme("leapfrog").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(4.0, 4, 16).unwrap();
    let y0 = PhaseState::new(vec![0.8], vec![0.1], 1.5).unwrap();
    for it in all_iterations(&pair, &sys, &y0, &grid, 4) {
        assert_eq!(it.node_states[0], y0);
        for (n, z) in it.node_states.iter().enumerate() {
            assert_eq!(z.t, 1.5 + grid.node_time(n));
        }
    }
}

#[test]
fn identical_propagators_converge_after_one_correction() {
    let sys = spin_orbit();
    let lf = builtin_scheme("leapfrog").unwrap();
    let grid = TwoLevelGrid::new(4.0, 4, 16).unwrap();
    let pair = PropagatorPair::new(lf.clone(), lf)
        .unwrap()
        .with_coarse_substeps(16)
        .unwrap();
    let its = all_iterations(&pair, &sys, &start(), &grid, 2);
    assert_eq!(its[1].node_states, its[0].node_states);
    assert_eq!(its[1].defect, 0.0);
    assert_eq!(its[2].defect, 0.0);
    let r = run(
        &pair,
        &sys,
        &start(),
        &grid,
        &CorrectorKind::PureParareal,
        1e-14,
        4,
        &Schedule::Serial,
    )
    .unwrap();
    assert_eq!(r.converged_at, Some(1));
}

#[test]
fn oscillator_defects_decrease_monotonically() {
    let ho = make_harmonic_oscillator(1.0).unwrap();
    let pair = PropagatorPair::matched(builtin_scheme("leapfrog").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(5.0, 10, 50).unwrap();
    let r = run(
        &pair,
        &ho,
        &PhaseState::scalar(1.0, 0.0).unwrap(),
        &grid,
        &CorrectorKind::PureParareal,
        1e-10,
        10,
        &Schedule::Serial,
    )
    .unwrap();
    let d = r.defects();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert_eq!(r.stop_reason, Some(StopReason::Tolerance));
    assert!(r.converged_at.unwrap() < 10);
}

#[test]
fn converged_nodes_are_close_to_the_fine_solution() {
    let sys = spin_orbit();
    let pair = PropagatorPair::matched(builtin_scheme("yoshida4").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(16.0, 16, 64).unwrap();
    let tol = 1e-10;
    let r = run(
        &pair,
        &sys,
        &start(),
        &grid,
        &CorrectorKind::PureParareal,
        tol,
        16,
        &Schedule::Serial,
    )
    .unwrap();
    assert!(r.converged_at.unwrap() < 16);
    let reference = sequential_fine(&pair, &sys, &start(), &grid).unwrap();
    for (a, b) in r.last().node_states.iter().zip(&reference) {
        assert!(a.distance(b) <= 10.0 * tol);
    }
}

#[test]
fn single_branch_converges_at_once() {
    let sys = spin_orbit();
    let pair = PropagatorPair::matched(builtin_scheme("leapfrog").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(2.0, 1, 20).unwrap();
    let r = run(
        &pair,
        &sys,
        &start(),
        &grid,
        &CorrectorKind::PureParareal,
        1e-30,
        5,
        &Schedule::Serial,
    )
    .unwrap();
    assert_eq!(r.converged_at, Some(1));
    assert_eq!(r.iterations.len(), 2);
}

#[test]
fn k_max_equal_to_branch_count_always_converges() {
    let sys = spin_orbit();
    let pair = PropagatorPair::unchecked(
        builtin_scheme("yoshida4").unwrap(),
        builtin_scheme("lie-trotter").unwrap(),
    );
    let grid = TwoLevelGrid::new(8.0, 8, 32).unwrap();
    let r = run(
        &pair,
        &sys,
        &start(),
        &grid,
        &CorrectorKind::PureParareal,
        1e-30,
        8,
        &Schedule::Serial,
    )
    .unwrap();
    assert!(r.converged_at.unwrap() <= 8);
}

#[test]
fn small_k_max_reports_non_convergence() {
    let sys = spin_orbit();
    let pair = PropagatorPair::unchecked(
        builtin_scheme("yoshida4").unwrap(),
        builtin_scheme("lie-trotter").unwrap(),
    );
    let grid = TwoLevelGrid::new(8.0, 8, 32).unwrap();
    let r = run(
        &pair,
        &sys,
        &start(),
        &grid,
        &CorrectorKind::PureParareal,
        1e-14,
        2,
        &Schedule::Serial,
    )
    .unwrap();
    assert_eq!(r.converged_at, None);
    assert_eq!(r.iterations.len(), 3);
}

#[test]
fn run_rejects_bad_arguments() {
    let sys = spin_orbit();
    let pair = PropagatorPair::matched(builtin_scheme("leapfrog").unwrap()).unwrap();
    let grid = TwoLevelGrid::new(2.0, 2, 2).unwrap();
    let y0 = start();
    let pp = CorrectorKind::PureParareal;
    assert!(run(&pair, &sys, &y0, &grid, &pp, 0.0, 2, &Schedule::Serial).is_err());
    assert!(run(&pair, &sys, &y0, &grid, &pp, 1e-8, 0, &Schedule::Serial).is_err());
    assert!(TwoLevelGrid::new(-1.0, 2, 2).is_err());
    assert!(TwoLevelGrid::new(1.0, 0, 2).is_err());
    assert!("bogus".parse::<CorrectorKind>().is_err());
    assert!(PropagatorPair::new(
        builtin_scheme("leapfrog").unwrap(),
        builtin_scheme("lie-trotter").unwrap()
    )
    .is_err());
}

#[test]
fn matched_coarse_beats_lie_trotter_on_spin_orbit() {
    let sys = spin_orbit();
    let fine = builtin_scheme("yoshida8").unwrap();
    let grid = TwoLevelGrid::new(32.0, 32, 128).unwrap();
    let candidates = vec![matched_coarse(&fine), builtin_scheme("lie-trotter").unwrap()];
    let table = compare_coarse_choices(&fine, &candidates, &sys, &start(), &grid, 1e-8, 32, &Schedule::Serial).unwrap();
    let matched = table.rows[0].outcome.as_ref().unwrap();
    let lie = table.rows[1].outcome.as_ref().unwrap();
    assert!(matched.converged_at.unwrap() <= lie.converged_at.unwrap());
    assert!(matched.surrogate_length < lie.surrogate_length);
}

#[test]
fn comparison_needs_two_candidates() {
    let sys = spin_orbit();
    let lf = builtin_scheme("leapfrog").unwrap();
    let grid = TwoLevelGrid::new(2.0, 2, 4).unwrap();
    let r = compare_coarse_choices(
        &lf,
        std::slice::from_ref(&lf),
        &sys,
        &start(),
        &grid,
        1e-8,
        2,
        &Schedule::Serial,
    );
    assert!(r.is_err());
}
