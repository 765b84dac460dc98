//! Energy-error series, the oscillation functional, and convergence
//! reporting for parareal runs.
//!
//! The "surrogate length" of a run sums, over iterations, the oscillation
//! across nodes of the energy change made by that iteration. It is a
//! computable length-like functional of the iteration path and is not the
//! Hofer distance (an infimum over all generating Hamiltonians); every
//! field and label carrying it says "surrogate".

use crate::error::{Error, Result};
use crate::integrators::{least_squares_slope, Trajectory};
use crate::parareal::PararealRun;
use crate::systems::SeparableSystem;

/// `max(xs) − min(xs)`.
pub fn oscillation(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Argument("oscillation of an empty series".into()));
    }
    if let Some(i) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::Argument(format!("non-finite value at index {i}")));
    }
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    Ok(hi - lo)
}

/// `H(z_j) − H(z_0)` along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EnergySeries {
    pub fn oscillation(&self) -> f64 {
        oscillation(&self.values).expect("series is non-empty and finite")
    }

    /// Least-squares slope of the energy error against time.
    pub fn drift_rate(&self) -> f64 {
        if self.values.len() < 2 {
            return 0.0;
        }
        least_squares_slope(&self.times, &self.values)
    }
}

pub fn energy_error_series(trajectory: &Trajectory, system: &SeparableSystem) -> Result<EnergySeries> {
    let first = trajectory
        .states
        .first()
        .ok_or_else(|| Error::Argument("empty trajectory".into()))?;
    let h0 = system.energy(first);
    let mut times = Vec::with_capacity(trajectory.states.len());
    let mut values = Vec::with_capacity(trajectory.states.len());
    for (j, z) in trajectory.states.iter().enumerate() {
        let e = system.energy(z) - h0;
        if !e.is_finite() {
            return Err(Error::Evaluation {
                field: format!("H[{}]", system.name()),
                coordinate: format!("state {j}"),
            });
        }
        times.push(z.t);
        values.push(e);
    }
    Ok(EnergySeries { times, values })
}

/// Per-iteration surrogate terms `osc_n( H(y_n^{k}) − H(y_n^{k−1}) )` for
/// `k = 1..K`.
pub fn surrogate_terms(run: &PararealRun, system: &SeparableSystem) -> Result<Vec<f64>> {
    run.iterations
        .windows(2)
        .map(|w| {
            let change: Vec<f64> = w[1]
                .node_states
                .iter()
                .zip(&w[0].node_states)
                .map(|(new, old)| system.energy(new) - system.energy(old))
                .collect();
            oscillation(&change)
        })
        .collect()
}

/// Sum of [`surrogate_terms`]. Not a Hofer distance.
pub fn hofer_surrogate_length(run: &PararealRun, system: &SeparableSystem) -> Result<f64> {
    if run.iterations.len() < 2 {
        return Err(Error::Argument(
            "surrogate length needs the initial guess and at least one iteration".into(),
        ));
    }
    Ok(surrogate_terms(run, system)?.iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub fine_scheme: String,
    pub coarse_scheme: String,
    pub coarse_substeps: usize,
    pub t_end: f64,
    pub n_branches: usize,
    pub n_fine: usize,
    /// `k = 1..K`; the initial coarse sweep has no defect.
    pub defects: Vec<f64>,
    pub converged_at: Option<usize>,
    /// Oscillation over nodes of `H(y_n^{(k)}) − H(y_0)`, `k = 1..K`.
    pub energy_oscillations: Vec<f64>,
    pub surrogate_terms: Vec<f64>,
    pub surrogate_length: f64,
}

pub fn convergence_report(run: &PararealRun, system: &SeparableSystem) -> ConvergenceReport {
    let later = run.iterations.iter().skip(1);
    let terms = surrogate_terms(run, system).unwrap_or_default();
    ConvergenceReport {
        fine_scheme: run.meta.fine.clone(),
        coarse_scheme: run.meta.coarse.clone(),
        coarse_substeps: run.meta.coarse_substeps,
        t_end: run.grid.t_end(),
        n_branches: run.grid.n_branches(),
        n_fine: run.grid.n_fine(),
        defects: later.clone().map(|r| r.defect).collect(),
        converged_at: run.converged_at,
        energy_oscillations: later
            .map(|r| oscillation(&r.energy_series).unwrap_or(f64::NAN))
            .collect(),
        surrogate_length: terms.iter().sum(),
        surrogate_terms: terms,
    }
}
