//! Shared fixtures for the criterion benches.

use sympara_core::{make_spin_orbit, PhaseState, SeparableSystem, SpinOrbitParams, TwoLevelGrid};

/// Spin-orbit model with ε = 0.1, α = 0.01, θ = 0.2.
pub fn spin_orbit() -> SeparableSystem {
    make_spin_orbit(SpinOrbitParams::new(0.1, 0.01, 0.2).unwrap())
}

pub fn spin_orbit_start() -> PhaseState {
    PhaseState::scalar(0.8, 0.0).unwrap()
}

/// `T = 32`, `Δt = 1`, `δt = 1/128`.
pub fn spin_orbit_grid() -> TwoLevelGrid {
    TwoLevelGrid::new(32.0, 32, 128).unwrap()
}
