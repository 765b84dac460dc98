//! Phase-space points, Hamilton's equations, and the Poisson/Lie brackets,
//! all evaluated numerically by central finite differences in canonical
//! coordinates `z = (q, p)`.
//!
//! Step-size conventions. Every finite-difference routine takes a base step
//! `h` and perturbs coordinate `x` by `h * (1 + |x|)`, with the step rounded
//! so that `x + h` and `x - h` are exactly representable apart.
//!
//! * First derivatives ([`hamiltonian_vector_field`], [`poisson_bracket`],
//!   [`symplecticity_defect`]) default to [`DEFAULT_FD_STEP`] = ε^(1/3).
//!   Truncation error is `O(h²)`, round-off `O(ε/h)`; both are near 1e-11
//!   for unit-scale data.
//! * Nested derivatives ([`lie_bracket`]) default to [`NESTED_FD_STEP`] =
//!   ε^(1/4) at both levels. The inner round-off `ε/h` is divided once more
//!   by `h`, so errors are near 1e-8 for unit-scale smooth data; tests use
//!   1e-6.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `f64::EPSILON.cbrt()`, the balanced step for first central differences.
pub const DEFAULT_FD_STEP: f64 = 6.055_454_452_393_343e-6;

/// `f64::EPSILON.powf(0.25)` = 2⁻¹³, used for differences of differences.
pub const NESTED_FD_STEP: f64 = 1.220_703_125e-4;

/// A point `(q, p)` of phase space at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::Dimension {
                expected: q.len(),
                got: p.len(),
            });
        }
        if q.is_empty() {
            return Err(Error::Parameter("phase space dimension must be at least 1".into()));
        }
        let state = PhaseState { q, p, t };
        if let Some(name) = state.first_non_finite() {
            return Err(Error::NonFinite(format!("initial value {name}")));
        }
        Ok(state)
    }

    /// One degree of freedom at `t = 0`.
    pub fn scalar(q: f64, p: f64) -> Result<Self> {
        Self::new(vec![q], vec![p], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    /// Name of the first NaN/Inf component, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        if !self.t.is_finite() {
            return Some("t".into());
        }
        (0..2 * self.dim())
            .find(|&i| !self.coord(i).is_finite())
            .map(|i| coord_name(self.dim(), i))
    }

    /// Flat coordinate `i` of `z = (q, p)`.
    pub fn coord(&self, i: usize) -> f64 {
        let n = self.dim();
        if i < n {
            self.q[i]
        } else {
            self.p[i - n]
        }
    }

    pub fn coord_mut(&mut self, i: usize) -> &mut f64 {
        let n = self.dim();
        if i < n {
            &mut self.q[i]
        } else {
            &mut self.p[i - n]
        }
    }

    /// `(q, p)` concatenated.
    pub fn coordinates(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    /// Max-norm of the `(q, p)` difference; `t` is ignored.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Returns `self + s * v` (time unchanged).
    pub fn displaced(&self, v: &TangentVector, s: f64) -> PhaseState {
        PhaseState {
            q: self.q.iter().zip(&v.dq).map(|(x, d)| x + s * d).collect(),
            p: self.p.iter().zip(&v.dp).map(|(x, d)| x + s * d).collect(),
            t: self.t,
        }
    }
}

impl fmt::Display for PhaseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={:?}, p={:?}, t={})", self.q, self.p, self.t)
    }
}

pub(crate) fn coord_name(n: usize, i: usize) -> String {
    if i < n {
        format!("q[{i}]")
    } else {
        format!("p[{}]", i - n)
    }
}

type Evaluator = dyn Fn(&PhaseState) -> f64 + Send + Sync;

/// A named smooth function on phase space.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    evaluator: Arc<Evaluator>,
}

impl ScalarField {
    pub fn new(name: impl Into<String>, f: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            name: name.into(),
            evaluator: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, z: &PhaseState) -> f64 {
        (self.evaluator)(z)
    }

    fn eval_checked(&self, z: &PhaseState, coordinate: impl FnOnce() -> String) -> Result<f64> {
        let v = self.eval(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                field: self.name.clone(),
                coordinate: coordinate(),
            })
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("name", &self.name).finish()
    }
}

/// A tangent vector `(dq, dp)` at some point of phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

impl TangentVector {
    pub fn zeros(n: usize) -> Self {
        TangentVector {
            dq: vec![0.0; n],
            dp: vec![0.0; n],
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.dq.iter().chain(&self.dp).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            dq: self.dq.iter().map(|x| s * x).collect(),
            dp: self.dp.iter().map(|x| s * x).collect(),
        }
    }

    pub fn sub(&self, other: &TangentVector) -> Self {
        TangentVector {
            dq: self.dq.iter().zip(&other.dq).map(|(a, b)| a - b).collect(),
            dp: self.dp.iter().zip(&other.dp).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &TangentVector) -> Self {
        self.sub(&other.scaled(-1.0))
    }
}

fn check_step(fd_step: f64) -> Result<()> {
    if fd_step > 0.0 && fd_step.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "fd_step must be positive and finite, got {fd_step}"
        )))
    }
}

/// Perturbation pair `(x - h, x + h)` for coordinate value `x`, with the
/// effective width `(x + h) - (x - h)` returned exactly.
fn stencil(x: f64, fd_step: f64) -> (f64, f64, f64) {
    let h = fd_step * (1.0 + x.abs());
    let plus = x + h;
    let minus = x - h;
    (minus, plus, plus - minus)
}

/// `(∂f/∂q, ∂f/∂p)` by central differences.
pub fn gradient(f: &ScalarField, z: &PhaseState, fd_step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_step(fd_step)?;
    let n = z.dim();
    let mut grad = Vec::with_capacity(2 * n);
    let mut probe = z.clone();
    for i in 0..2 * n {
        let x = z.coord(i);
        let (minus, plus, width) = stencil(x, fd_step);
        *probe.coord_mut(i) = plus;
        let fp = f.eval_checked(&probe, || coord_name(n, i))?;
        *probe.coord_mut(i) = minus;
        let fm = f.eval_checked(&probe, || coord_name(n, i))?;
        *probe.coord_mut(i) = x;
        grad.push((fp - fm) / width);
    }
    let dp = grad.split_off(n);
    Ok((grad, dp))
}

/// `X_H(z) = (∂H/∂p, −∂H/∂q)`.
pub fn hamiltonian_vector_field(h: &ScalarField, z: &PhaseState, fd_step: f64) -> Result<TangentVector> {
    let (hq, hp) = gradient(h, z, fd_step)?;
    Ok(TangentVector {
        dq: hp,
        dp: hq.into_iter().map(|x| -x).collect(),
    })
}

/// `{f, g} = Σᵢ ∂f/∂qᵢ ∂g/∂pᵢ − ∂g/∂qᵢ ∂f/∂pᵢ`.
pub fn poisson_bracket(f: &ScalarField, g: &ScalarField, z: &PhaseState, fd_step: f64) -> Result<f64> {
    let (fq, fp) = gradient(f, z, fd_step)?;
    let (gq, gp) = gradient(g, z, fd_step)?;
    Ok((0..z.dim()).map(|i| fq[i] * gp[i] - gq[i] * fp[i]).sum())
}

/// `D X_h(z) · v` by a central difference along `v`.
fn directional_derivative(h: &ScalarField, z: &PhaseState, v: &TangentVector, fd_step: f64) -> Result<TangentVector> {
    let vnorm = v.max_norm();
    if vnorm == 0.0 {
        return Ok(TangentVector::zeros(z.dim()));
    }
    let znorm = z.coordinates().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let s = fd_step * (1.0 + znorm) / vnorm;
    let plus = hamiltonian_vector_field(h, &z.displaced(v, s), fd_step)?;
    let minus = hamiltonian_vector_field(h, &z.displaced(v, -s), fd_step)?;
    Ok(plus.sub(&minus).scaled(0.5 / s))
}

/// `[X_f, X_g](z) = DX_g·X_f − DX_f·X_g`, the commutator of the two
/// Hamiltonian vector fields. With this convention
/// `X_{f,g} = −[X_f, X_g]`.
pub fn lie_bracket(f: &ScalarField, g: &ScalarField, z: &PhaseState, fd_step: f64) -> Result<TangentVector> {
    let xf = hamiltonian_vector_field(f, z, fd_step)?;
    let xg = hamiltonian_vector_field(g, z, fd_step)?;
    let dg_xf = directional_derivative(g, z, &xf, fd_step)?;
    let df_xg = directional_derivative(f, z, &xg, fd_step)?;
    Ok(dg_xf.sub(&df_xg))
}

/// Jacobian `J[i][j] = ∂map_i/∂z_j` of a phase-space map by central differences.
pub fn jacobian<F>(map: F, z: &PhaseState, fd_step: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&PhaseState) -> Result<PhaseState>,
{
    check_step(fd_step)?;
    let n = z.dim();
    let dim = 2 * n;
    let mut jac = vec![vec![0.0; dim]; dim];
    let mut probe = z.clone();
    for j in 0..dim {
        let x = z.coord(j);
        let (minus, plus, width) = stencil(x, fd_step);
        *probe.coord_mut(j) = plus;
        let out_p = eval_map(&map, &probe, n, j)?;
        *probe.coord_mut(j) = minus;
        let out_m = eval_map(&map, &probe, n, j)?;
        *probe.coord_mut(j) = x;
        for (i, row) in jac.iter_mut().enumerate() {
            row[j] = (out_p.coord(i) - out_m.coord(i)) / width;
        }
    }
    Ok(jac)
}

fn eval_map<F>(map: &F, z: &PhaseState, n: usize, j: usize) -> Result<PhaseState>
where
    F: Fn(&PhaseState) -> Result<PhaseState>,
{
    let out = map(z).map_err(|e| e.at(format!("perturbing {}", coord_name(n, j))))?;
    if out.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: out.dim(),
        });
    }
    match out.first_non_finite() {
        None => Ok(out),
        Some(name) => Err(Error::Evaluation {
            field: "map".into(),
            coordinate: format!("output {name} when perturbing {}", coord_name(n, j)),
        }),
    }
}

/// Max-norm of `JᵀΩJ − Ω` where `Ω = [[0, I], [−I, 0]]`.
pub fn symplecticity_defect<F>(map: F, z: &PhaseState, fd_step: f64) -> Result<f64>
where
    F: Fn(&PhaseState) -> Result<PhaseState>,
{
    let jac = jacobian(map, z, fd_step)?;
    Ok(symplectic_form_defect(&jac))
}

/// Max-norm of `JᵀΩJ − Ω` for an explicit `2n × 2n` matrix.
pub fn symplectic_form_defect(jac: &[Vec<f64>]) -> f64 {
    let dim = jac.len();
    let n = dim / 2;
    let omega = |i: usize, j: usize| -> f64 {
        if i < n && j == i + n {
            1.0
        } else if i >= n && j + n == i {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst = 0.0_f64;
    for a in 0..dim {
        for b in 0..dim {
            // (JᵀΩJ)_ab = Σ_k J_ka (ΩJ)_kb, with (ΩJ)_kb = ±J_{k∓n, b}
            let mut s = 0.0;
            for k in 0..n {
                s += jac[k][a] * jac[k + n][b] - jac[k + n][a] * jac[k][b];
            }
            worst = worst.max((s - omega(a, b)).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> ScalarField {
        ScalarField::new("H", |z| 0.5 * (z.p[0] * z.p[0] + z.q[0] * z.q[0]))
    }

    #[test]
    fn fd_step_constants_match_machine_epsilon() {
        assert!((DEFAULT_FD_STEP - f64::EPSILON.cbrt()).abs() < 1e-20);
        assert_eq!(NESTED_FD_STEP, f64::EPSILON.powf(0.25));
    }

    #[test]
    fn phase_state_rejects_bad_input() {
        assert!(matches!(
            PhaseState::new(vec![1.0], vec![], 0.0),
            Err(Error::Dimension { .. })
        ));
        assert!(PhaseState::new(vec![], vec![], 0.0).is_err());
        assert!(matches!(
            PhaseState::new(vec![f64::NAN], vec![0.0], 0.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn oscillator_field_at_turning_point() {
        let z = PhaseState::scalar(1.0, 0.0).unwrap();
        let x = hamiltonian_vector_field(&oscillator(), &z, DEFAULT_FD_STEP).unwrap();
        assert!(x.dq[0].abs() < 1e-10);
        assert!((x.dp[0] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_field_is_zero() {
        let c = ScalarField::new("c", |_| 3.5);
        let z = PhaseState::scalar(0.3, -2.0).unwrap();
        let x = hamiltonian_vector_field(&c, &z, DEFAULT_FD_STEP).unwrap();
        assert_eq!(x.max_norm(), 0.0);
    }

    #[test]
    fn non_finite_evaluation_names_coordinate() {
        let f = ScalarField::new("log_p", |z| z.p[0].ln());
        let z = PhaseState::scalar(1.0, 1e-9).unwrap();
        match hamiltonian_vector_field(&f, &z, DEFAULT_FD_STEP) {
            Err(Error::Evaluation { field, coordinate }) => {
                assert_eq!(field, "log_p");
                assert_eq!(coordinate, "p[0]");
            }
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_positive_step() {
        let z = PhaseState::scalar(1.0, 0.0).unwrap();
        assert!(matches!(
            hamiltonian_vector_field(&oscillator(), &z, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(poisson_bracket(&oscillator(), &oscillator(), &z, -1.0).is_err());
    }

    #[test]
    fn canonical_bracket_and_hamilton_equation() {
        let q = ScalarField::new("q", |z| z.q[0]);
        let p = ScalarField::new("p", |z| z.p[0]);
        let z = PhaseState::scalar(0.3, 0.7).unwrap();
        let qp = poisson_bracket(&q, &p, &z, DEFAULT_FD_STEP).unwrap();
        assert!((qp - 1.0).abs() < 1e-10);
        let qh = poisson_bracket(&q, &oscillator(), &z, DEFAULT_FD_STEP).unwrap();
        assert!((qh - 0.7).abs() < 1e-10);
        let hh = poisson_bracket(&oscillator(), &oscillator(), &z, DEFAULT_FD_STEP).unwrap();
        assert_eq!(hh, 0.0);
    }

    #[test]
    fn kinetic_potential_commutator() {
        // {T, V} = -qp for T = p²/2, V = q²/2, so -X_{T,V} = (q, -p).
        let t = ScalarField::new("T", |z| 0.5 * z.p[0] * z.p[0]);
        let v = ScalarField::new("V", |z| 0.5 * z.q[0] * z.q[0]);
        let z = PhaseState::scalar(1.0, 1.0).unwrap();
        let br = lie_bracket(&t, &v, &z, NESTED_FD_STEP).unwrap();
        assert!((br.dq[0] - 1.0).abs() < 1e-6, "{br:?}");
        assert!((br.dp[0] + 1.0).abs() < 1e-6, "{br:?}");
        let same = lie_bracket(&t, &t, &z, NESTED_FD_STEP).unwrap();
        assert_eq!(same.max_norm(), 0.0);
    }

    #[test]
    fn identity_map_is_symplectic() {
        let z = PhaseState::new(vec![0.2, -1.0], vec![3.0, 0.5], 0.0).unwrap();
        let d = symplecticity_defect(|s| Ok(s.clone()), &z, DEFAULT_FD_STEP).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn explicit_euler_defect_is_tau_squared() {
        // J = [[1, τ], [−τ, 1]] has det 1 + τ², so JᵀΩJ − Ω = τ²Ω.
        let tau = 0.1;
        let euler = move |s: &PhaseState| {
            Ok(PhaseState {
                q: vec![s.q[0] + tau * s.p[0]],
                p: vec![s.p[0] - tau * s.q[0]],
                t: s.t,
            })
        };
        let z = PhaseState::scalar(0.4, -0.3).unwrap();
        let d = symplecticity_defect(euler, &z, DEFAULT_FD_STEP).unwrap();
        assert!((d - tau * tau).abs() < 1e-9, "{d}");
    }

    #[test]
    fn exact_leapfrog_jacobian_is_symplectic() {
        // drift(τ/2) kick(τ) drift(τ/2) on p²/2 + q²/2 as a product of shears.
        let tau = 0.1;
        let drift = [[1.0, tau / 2.0], [0.0, 1.0]];
        let kick = [[1.0, 0.0], [-tau, 1.0]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut c = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            c
        };
        let m = mul(drift, mul(kick, drift));
        let exact: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
        assert!(symplectic_form_defect(&exact) < 1e-15);

        let map = move |s: &PhaseState| {
            let q = s.q[0] + 0.5 * tau * s.p[0];
            let p = s.p[0] - tau * q;
            Ok(PhaseState {
                q: vec![q + 0.5 * tau * p],
                p: vec![p],
                t: s.t,
            })
        };
        let z = PhaseState::scalar(0.7, 0.2).unwrap();
        let fd = jacobian(map, &z, DEFAULT_FD_STEP).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((fd[i][j] - exact[i][j]).abs() < 1e-9);
            }
        }
        assert!(symplecticity_defect(map, &z, DEFAULT_FD_STEP).unwrap() <= 1e-8);
    }

    #[test]
    fn non_finite_map_output_is_reported() {
        let z = PhaseState::scalar(0.0, 0.0).unwrap();
        let bad = |s: &PhaseState| {
            Ok(PhaseState {
                q: vec![1.0 / (s.q[0] - s.q[0])],
                p: vec![0.0],
                t: 0.0,
            })
        };
        assert!(matches!(
            symplecticity_defect(bad, &z, DEFAULT_FD_STEP),
            Err(Error::Evaluation { .. })
        ));
    }
}
