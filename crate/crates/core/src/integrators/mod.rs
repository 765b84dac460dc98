//! Splitting-method integrators for separable Hamiltonians.
//!
//! A [`SplittingScheme`] stores drift coefficients `a` and kick coefficients
//! `b` of equal length `m`; one step of size `τ` applies
//! `drift(a₁τ), kick(b₁τ), …, drift(a_mτ), kick(b_mτ)` in that order,
//! skipping zero coefficients. Kick-first words are written with a leading
//! zero drift, and words ending on a drift carry a trailing zero kick.

mod catalog;

pub use catalog::{builtin_scheme, catalog, CATALOG_NAMES};

use std::fmt;

use crate::diagnostics::oscillation;
use crate::error::{Error, Result};
use crate::phase_space::PhaseState;
use crate::systems::{drift, kick, SeparableSystem};

/// Tolerance on `Σa = 1` and `Σb = 1`.
pub const CONSISTENCY_TOL: f64 = 1e-14;

/// Relative tolerance used when comparing mirrored coefficients in
/// [`is_symmetric`].
pub const PALINDROME_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Drift,
    Kick,
}

/// One exponential `e^{c τ X_T}` (drift) or `e^{c τ X_V}` (kick) of a word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub kind: StageKind,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScheme {
    name: String,
    a: Vec<f64>,
    b: Vec<f64>,
    nominal_order: u32,
    provenance: String,
}

impl SplittingScheme {
    pub fn new(name: impl Into<String>, a: Vec<f64>, b: Vec<f64>, nominal_order: u32) -> Result<Self> {
        let name = name.into();
        if a.len() != b.len() {
            return Err(Error::Parameter(format!(
                "scheme {name}: {} drift vs {} kick coefficients",
                a.len(),
                b.len()
            )));
        }
        if a.is_empty() {
            return Err(Error::Parameter(format!("scheme {name} has no stages")));
        }
        if nominal_order == 0 {
            return Err(Error::Parameter(format!("scheme {name}: nominal order must be >= 1")));
        }
        if a.iter().chain(&b).any(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!("scheme {name}: non-finite coefficient")));
        }
        for (label, coeffs) in [("drift", &a), ("kick", &b)] {
            let sum: f64 = coeffs.iter().sum();
            if (sum - 1.0).abs() > CONSISTENCY_TOL {
                return Err(Error::Parameter(format!(
                    "scheme {name}: {label} coefficients sum to {sum}, not 1"
                )));
            }
        }
        Ok(SplittingScheme {
            name,
            a,
            b,
            nominal_order,
            provenance: String::new(),
        })
    }

    /// Builds a scheme from a stage word in application order. Adjacent
    /// stages of the same kind are merged and zeros dropped.
    pub fn from_word(name: impl Into<String>, word: &[Stage], nominal_order: u32) -> Result<Self> {
        let word = normalize_word(word);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut iter = word.iter().peekable();
        if let Some(first) = iter.peek() {
            if first.kind == StageKind::Kick {
                a.push(0.0);
                b.push(first.coeff);
                iter.next();
            }
        }
        while let Some(d) = iter.next() {
            debug_assert_eq!(d.kind, StageKind::Drift);
            a.push(d.coeff);
            match iter.next() {
                Some(k) => b.push(k.coeff),
                None => b.push(0.0),
            }
        }
        Self::new(name, a, b, nominal_order)
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = note.into();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn drift_coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn kick_coeffs(&self) -> &[f64] {
        &self.b
    }

    pub fn nominal_order(&self) -> u32 {
        self.nominal_order
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Number of `(drift, kick)` pairs `m`.
    pub fn stages(&self) -> usize {
        self.a.len()
    }

    /// Force evaluations per step (non-zero kicks).
    pub fn kick_count(&self) -> usize {
        self.word().iter().filter(|s| s.kind == StageKind::Kick).count()
    }

    /// Alternating drift/kick word with zero coefficients elided and
    /// neighbours of equal kind merged.
    pub fn word(&self) -> Vec<Stage> {
        let raw: Vec<Stage> = self
            .a
            .iter()
            .zip(&self.b)
            .flat_map(|(&a, &b)| {
                [
                    Stage {
                        kind: StageKind::Drift,
                        coeff: a,
                    },
                    Stage {
                        kind: StageKind::Kick,
                        coeff: b,
                    },
                ]
            })
            .collect();
        normalize_word(&raw)
    }

    /// The same scheme with its coefficient lists rebuilt from [`word`](Self::word).
    pub fn normalized(&self) -> SplittingScheme {
        let mut s = SplittingScheme::from_word(self.name.clone(), &self.word(), self.nominal_order)
            .expect("normalizing a valid scheme keeps it valid");
        s.provenance = self.provenance.clone();
        s
    }

    /// `self(τ/2)` followed by `other(τ/2)`, as one word.
    pub fn then_half(&self, other: &SplittingScheme, name: impl Into<String>, nominal_order: u32) -> Result<Self> {
        let word: Vec<Stage> = self
            .word()
            .into_iter()
            .chain(other.word())
            .map(|s| Stage {
                kind: s.kind,
                coeff: 0.5 * s.coeff,
            })
            .collect();
        SplittingScheme::from_word(name, &word, nominal_order)
    }
}

impl fmt::Display for SplittingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (order {}, {} stages)",
            self.name,
            self.nominal_order,
            self.stages()
        )
    }
}

fn normalize_word(word: &[Stage]) -> Vec<Stage> {
    let mut out: Vec<Stage> = Vec::with_capacity(word.len());
    for s in word.iter().filter(|s| s.coeff != 0.0) {
        match out.last_mut() {
            Some(last) if last.kind == s.kind => {
                last.coeff += s.coeff;
                if last.coeff == 0.0 {
                    out.pop();
                }
            }
            _ => out.push(*s),
        }
    }
    out
}

/// One step of size `tau`; time advances by `tau`.
pub fn step(scheme: &SplittingScheme, system: &SeparableSystem, state: &PhaseState, tau: f64) -> Result<PhaseState> {
    let mut z = state.clone();
    for (i, (&a, &b)) in scheme.a.iter().zip(&scheme.b).enumerate() {
        if a != 0.0 {
            z = drift(system, &z, a * tau).map_err(|e| e.at(format_args!("stage {i}")))?;
        }
        if b != 0.0 {
            z = kick(system, &z, b * tau).map_err(|e| e.at(format_args!("stage {i}")))?;
        }
    }
    z.t += tau;
    Ok(z)
}

/// A uniformly stepped discrete trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<PhaseState>,
    pub step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// `n_steps` consecutive steps, keeping every state.
pub fn integrate(
    scheme: &SplittingScheme,
    system: &SeparableSystem,
    initial: &PhaseState,
    tau: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial.clone());
    for j in 0..n_steps {
        let next = step(scheme, system, &states[j], tau).map_err(|e| e.at(format_args!("step {j}")))?;
        states.push(next);
    }
    Ok(Trajectory { states, step: tau })
}

/// Like [`integrate`] but only keeps the final state.
pub fn advance(
    scheme: &SplittingScheme,
    system: &SeparableSystem,
    initial: &PhaseState,
    tau: f64,
    n_steps: usize,
) -> Result<PhaseState> {
    let mut z = initial.clone();
    for j in 0..n_steps {
        z = step(scheme, system, &z, tau).map_err(|e| e.at(format_args!("step {j}")))?;
    }
    Ok(z)
}

/// The adjoint `Φ*_τ = Φ_{−τ}⁻¹`: the stage word read backwards.
pub fn adjoint(scheme: &SplittingScheme) -> SplittingScheme {
    let mut word = scheme.word();
    word.reverse();
    let mut s = SplittingScheme::from_word(format!("{}*", scheme.name), &word, scheme.nominal_order)
        .expect("reversing a valid word keeps it valid");
    s.provenance = format!("adjoint of {}", scheme.name);
    s
}

/// True iff the normalized stage word is a palindrome, i.e. the scheme is
/// its own adjoint.
pub fn is_symmetric(scheme: &SplittingScheme) -> bool {
    let word = scheme.word();
    let m = word.len();
    (0..m / 2).all(|i| {
        let (x, y) = (word[i], word[m - 1 - i]);
        x.kind == y.kind && (x.coeff - y.coeff).abs() <= PALINDROME_TOL * x.coeff.abs().max(1.0)
    })
}

/// Triple-jump composition `s(w₁τ) s(w₀τ) s(w₁τ)` raising a symmetric
/// order-`k` scheme (k even) to order `k + 2`.
pub fn yoshida_compose(scheme: &SplittingScheme) -> Result<SplittingScheme> {
    let k = scheme.nominal_order;
    if !is_symmetric(scheme) {
        return Err(Error::Precondition(format!(
            "triple-jump composition needs a symmetric scheme; {} is not",
            scheme.name
        )));
    }
    if !k.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "triple-jump composition needs an even order; {} has order {k}",
            scheme.name
        )));
    }
    let (w1, w0) = triple_jump_weights(k);
    let base = scheme.word();
    let word: Vec<Stage> = [w1, w0, w1]
        .iter()
        .flat_map(|&w| {
            base.iter().map(move |s| Stage {
                kind: s.kind,
                coeff: w * s.coeff,
            })
        })
        .collect();
    let out = SplittingScheme::from_word(format!("triple-jump({})", scheme.name), &word, k + 2)?;
    Ok(out.with_provenance(format!(
        "triple-jump of {} with w1 = 1/(2 - 2^(1/{})), w0 = 1 - 2 w1",
        scheme.name,
        k + 1
    )))
}

/// `(w₁, w₀)` with `w₁ = 1/(2 − 2^{1/(k+1)})`, `w₀ = 1 − 2w₁`.
pub fn triple_jump_weights(k: u32) -> (f64, f64) {
    let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / f64::from(k + 1)));
    (w1, 1.0 - 2.0 * w1)
}

/// Per-step-size global errors and their log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    /// True when the reference came from the system's exact flow.
    pub exact_reference: bool,
}

fn steps_for(t_end: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("step size must be positive, got {tau}")));
    }
    let ratio = t_end / tau;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::Precondition(format!(
            "step size {tau} does not divide t_end = {t_end}"
        )));
    }
    Ok(n as usize)
}

/// Integrates to `t_end` for each step size and measures the final-state
/// error against the exact flow, or, without one, against the same scheme
/// at `τ_min / 10`.
pub fn order_study(
    scheme: &SplittingScheme,
    system: &SeparableSystem,
    initial: &PhaseState,
    t_end: f64,
    taus: &[f64],
) -> Result<OrderStudy> {
    let mut distinct: Vec<f64> = taus.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Precondition(format!(
            "order estimation needs at least 3 distinct step sizes, got {}",
            distinct.len()
        )));
    }
    let counts = taus
        .iter()
        .map(|&tau| steps_for(t_end, tau))
        .collect::<Result<Vec<_>>>()?;

    let (reference, exact_reference) = match system.exact_flow(initial, t_end) {
        Some(r) => (r, true),
        None => {
            let tau_min = distinct[0];
            let fine = tau_min / 10.0;
            let n_min = steps_for(t_end, tau_min)?;
            let n_ref = n_min.checked_mul(10).filter(|_| fine > 0.0 && fine.is_normal());
            let n_ref = n_ref.ok_or_else(|| Error::Configuration(format!("reference step {tau_min}/10 underflows")))?;
            (advance(scheme, system, initial, fine, n_ref)?, false)
        }
    };

    let mut errors = Vec::with_capacity(taus.len());
    for (&tau, &n) in taus.iter().zip(&counts) {
        let end = advance(scheme, system, initial, tau, n)?;
        let err = end.distance(&reference);
        if err.is_nan() || err <= 0.0 {
            return Err(Error::Precondition(format!(
                "error at step size {tau} is {err}; cannot take its logarithm"
            )));
        }
        errors.push(err);
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(OrderStudy {
        taus: taus.to_vec(),
        errors,
        slope: least_squares_slope(&xs, &ys),
        exact_reference,
    })
}

/// Least-squares slope of `log(error)` against `log(τ)`.
pub fn empirical_order(
    scheme: &SplittingScheme,
    system: &SeparableSystem,
    initial: &PhaseState,
    t_end: f64,
    taus: &[f64],
) -> Result<f64> {
    order_study(scheme, system, initial, t_end, taus).map(|s| s.slope)
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Oscillation (max − min) of `H(z_j) − H(z_0)` along the trajectory.
pub fn energy_oscillation(
    scheme: &SplittingScheme,
    system: &SeparableSystem,
    initial: &PhaseState,
    tau: f64,
    n_steps: usize,
) -> Result<f64> {
    let traj = integrate(scheme, system, initial, tau, n_steps)?;
    let h0 = system.energy(initial);
    let series: Vec<f64> = traj.states.iter().map(|z| system.energy(z) - h0).collect();
    oscillation(&series)
}
