//! Separable Hamiltonians `H = T(p) + V(q)` and their exact drift and kick
//! sub-flows.
//!
//! Sign convention: `H = T + V` throughout. Potentials carrying a leading
//! minus sign (pendulum, spin-orbit) have it folded into `V`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::phase_space::{PhaseState, ScalarField};

/// Parameters `(ε, α, θ)` of the one-dimensional spin-orbit model
/// `H = p²/2 − ε( cos 2q + α( cos(2q+θ) − 7 cos(2q−θ) ) )`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbitParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl SpinOrbitParams {
    pub fn new(epsilon: f64, alpha: f64, theta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && alpha.is_finite() && theta.is_finite()) {
            return Err(Error::Parameter("spin-orbit parameters must be finite".into()));
        }
        if epsilon < 0.0 {
            return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(SpinOrbitParams { epsilon, alpha, theta })
    }
}

type Scalar = dyn Fn(&[f64]) -> f64 + Send + Sync;
type Vector = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

struct CustomParts {
    kinetic: Box<Scalar>,
    potential: Box<Scalar>,
    grad_kinetic: Box<Vector>,
    grad_potential: Box<Vector>,
}

#[derive(Clone)]
enum Model {
    Harmonic { omega: f64 },
    Pendulum { epsilon: f64 },
    SpinOrbit(SpinOrbitParams),
    Custom(Arc<CustomParts>),
}

/// An immutable separable Hamiltonian system.
#[derive(Clone)]
pub struct SeparableSystem {
    name: String,
    dim: usize,
    params: Vec<(String, f64)>,
    model: Model,
}

impl fmt::Debug for SeparableSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeparableSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

/// `H = p²/2 + ω²q²/2`.
pub fn make_harmonic_oscillator(omega: f64) -> Result<SeparableSystem> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Parameter(format!("omega must be > 0, got {omega}")));
    }
    Ok(SeparableSystem {
        name: "harmonic".into(),
        dim: 1,
        params: vec![("omega".into(), omega)],
        model: Model::Harmonic { omega },
    })
}

/// `H = p²/2 − ε cos 2q`.
pub fn make_pendulum(epsilon: f64) -> SeparableSystem {
    SeparableSystem {
        name: "pendulum".into(),
        dim: 1,
        params: vec![("epsilon".into(), epsilon)],
        model: Model::Pendulum { epsilon },
    }
}

/// The spin-orbit model, read as `cos(2q+θ) − 7 cos(2q−θ)` inside the
/// α-term (θ acts as a phase).
pub fn make_spin_orbit(params: SpinOrbitParams) -> SeparableSystem {
    SeparableSystem {
        name: "spin-orbit".into(),
        dim: 1,
        params: vec![
            ("epsilon".into(), params.epsilon),
            ("alpha".into(), params.alpha),
            ("theta".into(), params.theta),
        ],
        model: Model::SpinOrbit(params),
    }
}

impl SeparableSystem {
    /// A user-supplied separable system of `dim` degrees of freedom.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        kinetic: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        potential: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad_kinetic: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        grad_potential: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        Ok(SeparableSystem {
            name: name.into(),
            dim,
            params: Vec::new(),
            model: Model::Custom(Arc::new(CustomParts {
                kinetic: Box::new(kinetic),
                potential: Box::new(potential),
                grad_kinetic: Box::new(grad_kinetic),
                grad_potential: Box::new(grad_potential),
            })),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn kinetic(&self, p: &[f64]) -> f64 {
        match &self.model {
            Model::Custom(c) => (c.kinetic)(p),
            _ => 0.5 * p[0] * p[0],
        }
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        match &self.model {
            Model::Harmonic { omega } => 0.5 * omega * omega * q[0] * q[0],
            Model::Pendulum { epsilon } => -epsilon * (2.0 * q[0]).cos(),
            Model::SpinOrbit(SpinOrbitParams { epsilon, alpha, theta }) => {
                let x = 2.0 * q[0];
                -epsilon * (x.cos() + alpha * ((x + theta).cos() - 7.0 * (x - theta).cos()))
            }
            Model::Custom(c) => (c.potential)(q),
        }
    }

    pub fn grad_kinetic(&self, p: &[f64]) -> Vec<f64> {
        match &self.model {
            Model::Custom(c) => (c.grad_kinetic)(p),
            _ => vec![p[0]],
        }
    }

    pub fn grad_potential(&self, q: &[f64]) -> Vec<f64> {
        match &self.model {
            Model::Harmonic { omega } => vec![omega * omega * q[0]],
            Model::Pendulum { epsilon } => vec![2.0 * epsilon * (2.0 * q[0]).sin()],
            Model::SpinOrbit(SpinOrbitParams { epsilon, alpha, theta }) => {
                let x = 2.0 * q[0];
                vec![epsilon * (2.0 * x.sin() + alpha * (2.0 * (x + theta).sin() - 14.0 * (x - theta).sin()))]
            }
            Model::Custom(c) => (c.grad_potential)(q),
        }
    }

    pub fn energy(&self, z: &PhaseState) -> f64 {
        self.kinetic(&z.p) + self.potential(&z.q)
    }

    /// Exact time-`t` flow when the system has a closed form (harmonic
    /// oscillator only).
    pub fn exact_flow(&self, z: &PhaseState, t: f64) -> Option<PhaseState> {
        match self.model {
            Model::Harmonic { omega } => {
                let (s, c) = (omega * t).sin_cos();
                let (q, p) = (z.q[0], z.p[0]);
                Some(PhaseState {
                    q: vec![c * q + s * p / omega],
                    p: vec![-omega * s * q + c * p],
                    t: z.t + t,
                })
            }
            _ => None,
        }
    }

    pub fn has_exact_flow(&self) -> bool {
        matches!(self.model, Model::Harmonic { .. })
    }

    pub fn hamiltonian_field(&self) -> ScalarField {
        let sys = self.clone();
        ScalarField::new(format!("H[{}]", self.name), move |z| sys.energy(z))
    }

    pub fn kinetic_field(&self) -> ScalarField {
        let sys = self.clone();
        ScalarField::new(format!("T[{}]", self.name), move |z| sys.kinetic(&z.p))
    }

    pub fn potential_field(&self) -> ScalarField {
        let sys = self.clone();
        ScalarField::new(format!("V[{}]", self.name), move |z| sys.potential(&z.q))
    }

    fn check_dim(&self, z: &PhaseState) -> Result<()> {
        if z.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim,
                got: z.dim(),
            })
        }
    }
}

/// Exact flow of `X_T` for time `tau`: `q ← q + τ ∇T(p)`. Time is not advanced.
pub fn drift(system: &SeparableSystem, state: &PhaseState, tau: f64) -> Result<PhaseState> {
    system.check_dim(state)?;
    let mut out = state.clone();
    if tau == 0.0 {
        return Ok(out);
    }
    let v = system.grad_kinetic(&state.p);
    for (q, v) in out.q.iter_mut().zip(v) {
        *q += tau * v;
    }
    if let Some(name) = out.first_non_finite() {
        return Err(Error::NonFinite(format!("drift by {tau} produced non-finite {name}")));
    }
    Ok(out)
}

/// Exact flow of `X_V` for time `tau`: `p ← p − τ ∇V(q)`. Time is not advanced.
pub fn kick(system: &SeparableSystem, state: &PhaseState, tau: f64) -> Result<PhaseState> {
    system.check_dim(state)?;
    let mut out = state.clone();
    if tau == 0.0 {
        return Ok(out);
    }
    let f = system.grad_potential(&state.q);
    for (p, f) in out.p.iter_mut().zip(f) {
        *p -= tau * f;
    }
    if let Some(name) = out.first_non_finite() {
        return Err(Error::NonFinite(format!("kick by {tau} produced non-finite {name}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(q: f64, p: f64) -> PhaseState {
        PhaseState::scalar(q, p).unwrap()
    }

    #[test]
    fn harmonic_energies() {
        let h1 = make_harmonic_oscillator(1.0).unwrap();
        assert_eq!(h1.energy(&z(1.0, 0.0)), 0.5);
        let h2 = make_harmonic_oscillator(2.0).unwrap();
        assert_eq!(h2.energy(&z(0.5, 0.5)), 0.625);
        assert!(make_harmonic_oscillator(0.0).is_err());
        assert!(make_harmonic_oscillator(-1.0).is_err());
    }

    #[test]
    fn quarter_rotation() {
        let h = make_harmonic_oscillator(1.0).unwrap();
        let end = h.exact_flow(&z(1.0, 0.0), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(end.q[0].abs() < 1e-15);
        assert!((end.p[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pendulum_values() {
        let free = make_pendulum(0.0);
        for q in [-3.0, 0.0, 0.4, 2.0] {
            assert_eq!(free.potential(&[q]), 0.0);
        }
        let pend = make_pendulum(0.1);
        assert_eq!(pend.energy(&z(0.0, 0.0)), -0.1);
        assert_eq!(pend.grad_potential(&[0.8])[0], 0.2 * 1.6_f64.sin());
    }

    #[test]
    fn spin_orbit_without_alpha_is_pendulum() {
        let so = make_spin_orbit(SpinOrbitParams::new(0.1, 0.0, 0.2).unwrap());
        let pend = make_pendulum(0.1);
        for i in 0..50 {
            let q = -3.0 + 0.13 * i as f64;
            assert_eq!(so.potential(&[q]), pend.potential(&[q]));
            assert_eq!(so.grad_potential(&[q]), pend.grad_potential(&[q]));
        }
    }

    #[test]
    fn spin_orbit_params_validation() {
        assert!(SpinOrbitParams::new(-0.1, 0.0, 0.0).is_err());
        assert!(SpinOrbitParams::new(0.1, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn drift_and_kick_examples() {
        let h = make_harmonic_oscillator(1.0).unwrap();
        let s = z(1.0, 2.0);
        assert_eq!(drift(&h, &s, 0.0).unwrap(), s);
        assert_eq!(kick(&h, &s, 0.0).unwrap(), s);
        let d = drift(&h, &s, 0.5).unwrap();
        assert_eq!((d.q[0], d.p[0]), (2.0, 2.0));
        let k = kick(&h, &z(1.0, 0.0), 0.1).unwrap();
        assert_eq!((k.q[0], k.p[0]), (1.0, -0.1));
    }

    #[test]
    fn sub_flows_are_additive() {
        let so = make_spin_orbit(SpinOrbitParams::new(0.1, 0.01, 0.2).unwrap());
        let s = z(0.8, 0.3);
        let tau = 0.37;
        let d2 = drift(&so, &drift(&so, &s, tau / 2.0).unwrap(), tau / 2.0).unwrap();
        let d1 = drift(&so, &s, tau).unwrap();
        assert!(d2.distance(&d1) <= 1e-15);
        let k2 = kick(&so, &kick(&so, &s, tau / 2.0).unwrap(), tau / 2.0).unwrap();
        let k1 = kick(&so, &s, tau).unwrap();
        assert!(k2.distance(&k1) <= 1e-15);
    }

    #[test]
    fn sub_flows_conserve_own_part() {
        let so = make_spin_orbit(SpinOrbitParams::new(0.1, 0.01, 0.2).unwrap());
        let s = z(0.8, 0.3);
        assert_eq!(so.kinetic(&drift(&so, &s, 0.7).unwrap().p), so.kinetic(&s.p));
        assert_eq!(so.potential(&kick(&so, &s, 0.7).unwrap().q), so.potential(&s.q));
        // time is left to the integrator
        assert_eq!(drift(&so, &s, 0.7).unwrap().t, s.t);
    }

    #[test]
    fn overflow_is_reported() {
        let h = make_harmonic_oscillator(1.0).unwrap();
        let s = z(1.0, f64::MAX);
        assert!(matches!(drift(&h, &s, 10.0), Err(Error::NonFinite(_))));
        assert!(matches!(kick(&h, &z(f64::MAX, 1.0), -10.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn dimension_is_checked() {
        let h = make_harmonic_oscillator(1.0).unwrap();
        let s = PhaseState::new(vec![1.0, 2.0], vec![0.0, 0.0], 0.0).unwrap();
        assert!(matches!(drift(&h, &s, 0.1), Err(Error::Dimension { .. })));
    }

    #[test]
    fn custom_system_in_two_dimensions() {
        let sys = SeparableSystem::custom(
            "aniso",
            2,
            |p| 0.5 * (p[0] * p[0] + p[1] * p[1]),
            |q| 0.5 * q[0] * q[0] + 2.0 * q[1] * q[1],
            |p| p.to_vec(),
            |q| vec![q[0], 4.0 * q[1]],
        )
        .unwrap();
        let s = PhaseState::new(vec![1.0, 1.0], vec![0.0, 1.0], 0.0).unwrap();
        assert_eq!(sys.energy(&s), 3.0);
        let k = kick(&sys, &s, 0.5).unwrap();
        assert_eq!(k.p, vec![-0.5, -1.0]);
        assert!(!sys.has_exact_flow());
    }
}
