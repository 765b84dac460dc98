//! Splitting-method symplectic integrators for separable Hamiltonians, a
//! two-level parareal solver built on them, and the numerical geometry used
//! to check both (finite-difference brackets, symplecticity defects,
//! energy-oscillation diagnostics).
//!
//! ```
//! use sympara_core::{builtin_scheme, integrate, make_harmonic_oscillator, PhaseState};
//!
//! let system = make_harmonic_oscillator(1.0).unwrap();
//! let scheme = builtin_scheme("leapfrog").unwrap();
//! let start = PhaseState::scalar(1.0, 0.0).unwrap();
//! let traj = integrate(&scheme, &system, &start, 0.01, 628).unwrap();
//! let exact = system.exact_flow(&start, 6.28).unwrap();
//! assert!(traj.last().distance(&exact) < 1e-3);
//! ```

pub mod diagnostics;
pub mod error;
pub mod integrators;
pub mod parareal;
pub mod phase_space;
pub mod systems;

pub use diagnostics::{
    convergence_report, energy_error_series, hofer_surrogate_length, oscillation, ConvergenceReport, EnergySeries,
};
pub use error::{Error, Result};
pub use integrators::{
    adjoint, builtin_scheme, catalog, empirical_order, energy_oscillation, integrate, is_symmetric, order_study, step,
    yoshida_compose, OrderStudy, SplittingScheme, Trajectory, CATALOG_NAMES,
};
pub use parareal::{
    coarse_propagate, compare_coarse_choices, fine_propagate, initial_guess, matched_coarse, parareal_iterate, run,
    ComparisonTable, CorrectorKind, IterationRecord, PararealRun, PropagatorPair, Schedule, TwoLevelGrid,
};
pub use phase_space::{
    hamiltonian_vector_field, lie_bracket, poisson_bracket, symplecticity_defect, PhaseState, ScalarField,
    TangentVector, DEFAULT_FD_STEP, NESTED_FD_STEP,
};
pub use systems::{
    drift, kick, make_harmonic_oscillator, make_pendulum, make_spin_orbit, SeparableSystem, SpinOrbitParams,
};
