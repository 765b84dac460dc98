//! Two-level time-parallel integration.
//!
//! `[0, T]` is cut into `N` branches of length `Δt = T/N`; each branch is
//! resolved by `N_δ` fine steps of `δt = Δt/N_δ`. The coarse propagator `𝓖`
//! advances one branch with the coarse scheme (in `coarse_substeps` steps,
//! default one step of `Δt`), the fine propagator `𝓕` with `N_δ` fine steps.
//! After the coarse initial sweep every iteration evaluates `𝓕(y_n^{(k)})`
//! for all branches (independently, optionally on a thread pool) and then
//! sweeps sequentially through
//! `y_{n+1}^{(k+1)} = Γ(𝓕(y_n^{(k)}), 𝓖(y_n^{(k+1)}), 𝓖(y_n^{(k)}))`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::diagnostics::{hofer_surrogate_length, oscillation};
use crate::error::{Error, Result};
use crate::integrators::{is_symmetric, step, SplittingScheme};
use crate::phase_space::PhaseState;
use crate::systems::SeparableSystem;

/// The discretization `δt ≺ Δt ≺ [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelGrid {
    t_end: f64,
    n_branches: usize,
    n_fine: usize,
}

impl TwoLevelGrid {
    pub fn new(t_end: f64, n_branches: usize, n_fine: usize) -> Result<Self> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be finite and >= 0, got {t_end}")));
        }
        if n_branches == 0 || n_fine == 0 {
            return Err(Error::Parameter(format!(
                "need at least one branch and one fine step per branch, got N={n_branches}, N_delta={n_fine}"
            )));
        }
        Ok(TwoLevelGrid {
            t_end,
            n_branches,
            n_fine,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_branches(&self) -> usize {
        self.n_branches
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    /// `Δt = T / N`.
    pub fn coarse_step(&self) -> f64 {
        self.t_end / self.n_branches as f64
    }

    /// `δt = Δt / N_δ`.
    pub fn fine_step(&self) -> f64 {
        self.coarse_step() / self.n_fine as f64
    }

    /// `t_n = n Δt`.
    pub fn node_time(&self, n: usize) -> f64 {
        n as f64 * self.coarse_step()
    }
}

/// Where the coarse scheme of a [`PropagatorPair`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseOrigin {
    /// Fine coefficient word reused at `Δt`.
    Matched,
    Chosen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPair {
    fine: SplittingScheme,
    coarse: SplittingScheme,
    coarse_substeps: usize,
    origin: CoarseOrigin,
}

impl PropagatorPair {
    /// Both schemes must be symmetric.
    pub fn new(fine: SplittingScheme, coarse: SplittingScheme) -> Result<Self> {
        for s in [&fine, &coarse] {
            if !is_symmetric(s) {
                return Err(Error::Precondition(format!(
                    "propagator schemes must be symmetric; {} is not",
                    s.name()
                )));
            }
        }
        Ok(Self::unchecked(fine, coarse))
    }

    /// Like [`new`](Self::new) without the symmetry requirement. Used to run
    /// simplified (e.g. first-order) coarse schemes for comparison.
    pub fn unchecked(fine: SplittingScheme, coarse: SplittingScheme) -> Self {
        PropagatorPair {
            fine,
            coarse,
            coarse_substeps: 1,
            origin: CoarseOrigin::Chosen,
        }
    }

    /// Fine scheme paired with [`matched_coarse`] of itself.
    pub fn matched(fine: SplittingScheme) -> Result<Self> {
        let coarse = matched_coarse(&fine);
        let mut pair = Self::new(fine, coarse)?;
        pair.origin = CoarseOrigin::Matched;
        Ok(pair)
    }

    pub fn with_coarse_substeps(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("coarse_substeps must be >= 1".into()));
        }
        self.coarse_substeps = n;
        Ok(self)
    }

    pub fn fine(&self) -> &SplittingScheme {
        &self.fine
    }

    pub fn coarse(&self) -> &SplittingScheme {
        &self.coarse
    }

    pub fn coarse_substeps(&self) -> usize {
        self.coarse_substeps
    }

    pub fn origin(&self) -> CoarseOrigin {
        self.origin
    }

    pub fn provenance(&self) -> String {
        let origin = match self.origin {
            CoarseOrigin::Matched => "matched to fine",
            CoarseOrigin::Chosen => "chosen",
        };
        format!(
            "fine={} coarse={} ({origin}, {} substep(s) per branch)",
            self.fine.name(),
            self.coarse.name(),
            self.coarse_substeps
        )
    }
}

/// The coarse scheme prescribed for a given fine scheme: the same
/// coefficient word, applied at the coarse step `Δt`.
pub fn matched_coarse(fine: &SplittingScheme) -> SplittingScheme {
    let note = if fine.provenance().is_empty() {
        format!("coefficients of {} reused at the coarse step", fine.name())
    } else {
        format!("{}; reused at the coarse step", fine.provenance())
    };
    fine.clone().with_provenance(note)
}

/// `𝓖`: one branch advance of `Δt` with the coarse scheme.
pub fn coarse_propagate(
    pair: &PropagatorPair,
    system: &SeparableSystem,
    state: &PhaseState,
    grid: &TwoLevelGrid,
) -> Result<PhaseState> {
    let n = pair.coarse_substeps;
    let h = grid.coarse_step() / n as f64;
    let mut z = state.clone();
    for j in 0..n {
        z = step(&pair.coarse, system, &z, h).map_err(|e| e.at(format_args!("coarse substep {j}")))?;
    }
    Ok(z)
}

/// `𝓕`: `N_δ` fine steps of `δt`.
pub fn fine_propagate(
    pair: &PropagatorPair,
    system: &SeparableSystem,
    state: &PhaseState,
    grid: &TwoLevelGrid,
) -> Result<PhaseState> {
    let h = grid.fine_step();
    let mut z = state.clone();
    for j in 0..grid.n_fine {
        z = step(&pair.fine, system, &z, h).map_err(|e| e.at(format_args!("fine step {j}")))?;
    }
    Ok(z)
}

/// The fine solution at every node by a plain sequential sweep.
pub fn sequential_fine(
    pair: &PropagatorPair,
    system: &SeparableSystem,
    y0: &PhaseState,
    grid: &TwoLevelGrid,
) -> Result<Vec<PhaseState>> {
    let mut nodes = Vec::with_capacity(grid.n_branches + 1);
    nodes.push(y0.clone());
    for n in 0..grid.n_branches {
        let next = fine_propagate(pair, system, &nodes[n], grid).map_err(|e| e.at(format_args!("branch {n}")))?;
        nodes.push(next);
    }
    Ok(nodes)
}

/// The corrector `Γ(𝓕(y_n^{(k)}), 𝓖(y_n^{(k+1)}), 𝓖(y_n^{(k)}))`.
pub trait Corrector: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn correct(&self, fine_prev: &PhaseState, coarse_new: &PhaseState, coarse_prev: &PhaseState) -> Result<PhaseState>;
}

#[derive(Debug, Clone)]
pub enum CorrectorKind {
    /// `𝓕(y_n^{(k)}) + 𝓖(y_n^{(k+1)}) − 𝓖(y_n^{(k)})`.
    PureParareal,
    Custom(Arc<dyn Corrector>),
}

impl CorrectorKind {
    pub fn name(&self) -> &str {
        match self {
            CorrectorKind::PureParareal => "pure-parareal",
            CorrectorKind::Custom(c) => c.name(),
        }
    }

    fn correct(&self, fine_prev: &PhaseState, coarse_new: &PhaseState, coarse_prev: &PhaseState) -> Result<PhaseState> {
        match self {
            CorrectorKind::PureParareal => pure_parareal(fine_prev, coarse_new, coarse_prev),
            CorrectorKind::Custom(c) => c.correct(fine_prev, coarse_new, coarse_prev),
        }
    }
}

impl FromStr for CorrectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pure-parareal" | "parareal" => Ok(CorrectorKind::PureParareal),
            other => Err(Error::Configuration(format!(
                "unknown corrector `{other}`; available: pure-parareal"
            ))),
        }
    }
}

/// Component-wise `g_new + (f − g_old)`. A component whose coarse inputs
/// agree bit-for-bit takes `f` unchanged, so converged nodes reproduce the
/// fine solution exactly and `𝓕 ≡ 𝓖` reduces to the coarse sweep exactly.
fn pure_parareal(f: &PhaseState, g_new: &PhaseState, g_old: &PhaseState) -> Result<PhaseState> {
    let combine = |f: f64, gn: f64, go: f64| if gn == go { f } else { gn + (f - go) };
    let out = PhaseState {
        q: (0..f.dim()).map(|i| combine(f.q[i], g_new.q[i], g_old.q[i])).collect(),
        p: (0..f.dim()).map(|i| combine(f.p[i], g_new.p[i], g_old.p[i])).collect(),
        t: g_new.t,
    };
    match out.first_non_finite() {
        None => Ok(out),
        Some(name) => Err(Error::NonFinite(format!(
            "parareal correction produced non-finite {name}"
        ))),
    }
}

/// How the per-branch fine solves of one iteration are executed.
#[derive(Clone, Default)]
pub enum Schedule {
    #[default]
    Serial,
    Pool(Arc<ThreadPool>),
}

impl Schedule {
    /// `threads <= 1` is serial.
    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads <= 1 {
            return Ok(Schedule::Serial);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Configuration(format!("cannot build thread pool: {e}")))?;
        Ok(Schedule::Pool(Arc::new(pool)))
    }

    /// `f(0), …, f(n-1)` in index order, whatever the execution order.
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
    {
        match self {
            Schedule::Serial => (0..n).map(f).collect(),
            Schedule::Pool(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Serial => write!(f, "Serial"),
            Schedule::Pool(p) => write!(f, "Pool({} threads)", p.current_num_threads()),
        }
    }
}

/// Node states `y_n^{(k)}`, `n = 0..N`, of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub node_states: Vec<PhaseState>,
    /// `max_n ‖y_n^{(k)} − y_n^{(k−1)}‖_∞`; `+∞` for the initial guess.
    pub defect: f64,
    /// `H(y_n^{(k)}) − H(y_0)` per node.
    pub energy_series: Vec<f64>,
}

fn energy_series(system: &SeparableSystem, nodes: &[PhaseState]) -> Vec<f64> {
    let h0 = system.energy(&nodes[0]);
    nodes.iter().map(|z| system.energy(z) - h0).collect()
}

fn pin_time(mut z: PhaseState, y0: &PhaseState, grid: &TwoLevelGrid, n: usize) -> PhaseState {
    z.t = y0.t + grid.node_time(n);
    z
}

/// `y_0^{(0)} = y(0)`, `y_{n+1}^{(0)} = 𝓖(y_n^{(0)})`.
pub fn initial_guess(
    pair: &PropagatorPair,
    system: &SeparableSystem,
    y0: &PhaseState,
    grid: &TwoLevelGrid,
) -> Result<IterationRecord> {
    let mut nodes = Vec::with_capacity(grid.n_branches + 1);
    nodes.push(y0.clone());
    for n in 0..grid.n_branches {
        let next = coarse_propagate(pair, system, &nodes[n], grid).map_err(|e| e.at(format_args!("node {n}")))?;
        nodes.push(pin_time(next, y0, grid, n + 1));
    }
    Ok(IterationRecord {
        k: 0,
        energy_series: energy_series(system, &nodes),
        node_states: nodes,
        defect: f64::INFINITY,
    })
}

/// One corrector iteration `k → k+1`.
///
/// All `𝓕(y_n^{(k)})` and `𝓖(y_n^{(k)})` are evaluated first (the parallel
/// region); the correction then runs over `n = 0..N−1` in order. Nodes
/// already fixed by earlier iterations are recomputed rather than skipped;
/// the corrector leaves them unchanged.
pub fn parareal_iterate(
    pair: &PropagatorPair,
    system: &SeparableSystem,
    prev: &IterationRecord,
    grid: &TwoLevelGrid,
    corrector: &CorrectorKind,
    schedule: &Schedule,
) -> Result<IterationRecord> {
    let n_branches = grid.n_branches;
    if prev.node_states.len() != n_branches + 1 {
        return Err(Error::Precondition(format!(
            "iteration {} has {} nodes, grid needs {}",
            prev.k,
            prev.node_states.len(),
            n_branches + 1
        )));
    }
    let propagated = schedule.map_indexed(n_branches, |n| {
        let y = &prev.node_states[n];
        let f = fine_propagate(pair, system, y, grid).map_err(|e| e.at(format_args!("branch {n}")))?;
        let g = coarse_propagate(pair, system, y, grid).map_err(|e| e.at(format_args!("branch {n}")))?;
        Ok((f, g))
    });
    let propagated: Vec<(PhaseState, PhaseState)> = propagated.into_iter().collect::<Result<_>>()?;

    let y0 = &prev.node_states[0];
    let mut nodes = Vec::with_capacity(n_branches + 1);
    nodes.push(y0.clone());
    for (n, (fine_prev, coarse_prev)) in propagated.iter().enumerate() {
        let coarse_new =
            coarse_propagate(pair, system, &nodes[n], grid).map_err(|e| e.at(format_args!("branch {n}")))?;
        let next = corrector
            .correct(fine_prev, &coarse_new, coarse_prev)
            .map_err(|e| e.at(format_args!("node {}", n + 1)))?;
        nodes.push(pin_time(next, y0, grid, n + 1));
    }
    let defect = nodes
        .iter()
        .zip(&prev.node_states)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max);
    Ok(IterationRecord {
        k: prev.k + 1,
        energy_series: energy_series(system, &nodes),
        node_states: nodes,
        defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Defect fell to the tolerance.
    Tolerance,
    /// `k = N` iterations of pure parareal reproduce the fine solution at
    /// every node.
    Exactness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub fine: String,
    pub coarse: String,
    pub coarse_origin: CoarseOrigin,
    pub coarse_substeps: usize,
    pub corrector: String,
    pub tol: f64,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PararealRun {
    /// `iterations[0]` is the coarse initial guess.
    pub iterations: Vec<IterationRecord>,
    pub converged_at: Option<usize>,
    pub stop_reason: Option<StopReason>,
    pub grid: TwoLevelGrid,
    pub meta: RunMeta,
}

impl PararealRun {
    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("run holds the initial guess")
    }

    /// Defects of iterations `1..=K`.
    pub fn defects(&self) -> Vec<f64> {
        self.iterations.iter().skip(1).map(|r| r.defect).collect()
    }
}

/// Iterates until the defect is at most `tol` or `k_max` is reached.
/// Pure parareal also stops at `k = N`, where exactness makes every node
/// equal to the sequential fine solution. Non-convergence is reported
/// through `converged_at == None`, not as an error.
#[allow(clippy::too_many_arguments)]
pub fn run(
    pair: &PropagatorPair,
    system: &SeparableSystem,
    y0: &PhaseState,
    grid: &TwoLevelGrid,
    corrector: &CorrectorKind,
    tol: f64,
    k_max: usize,
    schedule: &Schedule,
) -> Result<PararealRun> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Precondition(format!("tol must be > 0, got {tol}")));
    }
    if k_max == 0 {
        return Err(Error::Precondition("k_max must be >= 1".into()));
    }
    let mut iterations = vec![initial_guess(pair, system, y0, grid)?];
    let mut converged_at = None;
    let mut stop_reason = None;
    for k in 1..=k_max {
        let next = parareal_iterate(pair, system, iterations.last().unwrap(), grid, corrector, schedule)
            .map_err(|e| e.at(format_args!("iteration {k}")))?;
        let defect = next.defect;
        iterations.push(next);
        if defect <= tol {
            converged_at = Some(k);
            stop_reason = Some(StopReason::Tolerance);
            break;
        }
        if matches!(corrector, CorrectorKind::PureParareal) && k >= grid.n_branches {
            converged_at = Some(k);
            stop_reason = Some(StopReason::Exactness);
            break;
        }
    }
    Ok(PararealRun {
        iterations,
        converged_at,
        stop_reason,
        grid: *grid,
        meta: RunMeta {
            fine: pair.fine.name().to_string(),
            coarse: pair.coarse.name().to_string(),
            coarse_origin: pair.origin,
            coarse_substeps: pair.coarse_substeps,
            corrector: corrector.name().to_string(),
            tol,
            k_max,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub converged_at: Option<usize>,
    pub defects: Vec<f64>,
    /// Oscillation over nodes of the energy error, per iteration `k ≥ 1`.
    pub energy_oscillations: Vec<f64>,
    pub surrogate_length: f64,
}

impl ComparisonOutcome {
    pub fn final_defect(&self) -> f64 {
        self.defects.last().copied().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scheme: String,
    pub outcome: std::result::Result<ComparisonOutcome, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub fine: String,
    pub rows: Vec<ComparisonRow>,
}

/// Runs parareal once per candidate coarse scheme against the same fine
/// scheme. A failing candidate is recorded in its row; the others still run.
#[allow(clippy::too_many_arguments)]
pub fn compare_coarse_choices(
    fine: &SplittingScheme,
    candidates: &[SplittingScheme],
    system: &SeparableSystem,
    y0: &PhaseState,
    grid: &TwoLevelGrid,
    tol: f64,
    k_max: usize,
    schedule: &Schedule,
) -> Result<ComparisonTable> {
    if candidates.len() < 2 {
        return Err(Error::Precondition(format!(
            "comparison needs at least 2 candidates, got {}",
            candidates.len()
        )));
    }
    let rows = candidates
        .iter()
        .map(|coarse| {
            let pair = PropagatorPair::unchecked(fine.clone(), coarse.clone());
            let outcome = run(
                &pair,
                system,
                y0,
                grid,
                &CorrectorKind::PureParareal,
                tol,
                k_max,
                schedule,
            )
            .and_then(|r| {
                Ok(ComparisonOutcome {
                    converged_at: r.converged_at,
                    defects: r.defects(),
                    energy_oscillations: r
                        .iterations
                        .iter()
                        .skip(1)
                        .map(|rec| oscillation(&rec.energy_series))
                        .collect::<Result<_>>()?,
                    surrogate_length: hofer_surrogate_length(&r, system)?,
                })
            });
            ComparisonRow {
                scheme: coarse.name().to_string(),
                outcome,
            }
        })
        .collect();
    Ok(ComparisonTable {
        fine: fine.name().to_string(),
        rows,
    })
}
