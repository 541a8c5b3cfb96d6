//! Angular-velocity observer on the extended state `X̂ = (â, b̂, ω̂)`.
//!
//! ```text
//! â' = a × ω̂ − αk(â − a)
//! b̂' = b × ω̂ − αk(b̂ − b)
//! ω̂' = E(ω̂) + J⁻¹τ + k² a × (â − a) + k² b × (b̂ − b)
//! ```
//!
//! The measured `a`, `b` (never `â`, `b̂`) enter every cross product. `â` and
//! `b̂` are not renormalized: the dynamics do not preserve their norm.

use std::ops::{Add, Mul};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector3;
use crate::rigid_body::InertiaDiag;
use crate::sensors::MeasurementPair;

/// Tuning parameters: `α ∈ (0, 2√(1−p))` and `k > 0` (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObserverGains {
    alpha: f64,
    k: f64,
}

impl ObserverGains {
    pub fn new(alpha: f64, k: f64, p: f64) -> Result<Self> {
        let upper = alpha_upper_bound(p)?;
        if !(alpha > 0.0 && alpha < upper) {
            return Err(Error::AlphaOutOfRange { alpha, p, upper });
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gain k = {k} must be positive"
            )));
        }
        Ok(ObserverGains { alpha, k })
    }

    /// `α = √(1−p)` with the given `k`.
    pub fn with_default_alpha(k: f64, p: f64) -> Result<Self> {
        ObserverGains::new(default_alpha(p), k, p)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Exclusive upper bound `2√(1−p)` on `α`.
pub fn alpha_upper_bound(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1)")));
    }
    Ok(2.0 * (1.0 - p).sqrt())
}

pub fn default_alpha(p: f64) -> f64 {
    (1.0 - p).sqrt()
}

/// Estimate `(â, b̂, ω̂)`, or a time derivative of one.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ObserverState {
    pub a_hat: Vector3,
    pub b_hat: Vector3,
    pub omega_hat: Vector3,
}

impl Add for ObserverState {
    type Output = ObserverState;
    fn add(self, o: ObserverState) -> ObserverState {
        ObserverState {
            a_hat: self.a_hat + o.a_hat,
            b_hat: self.b_hat + o.b_hat,
            omega_hat: self.omega_hat + o.omega_hat,
        }
    }
}

impl Mul<f64> for ObserverState {
    type Output = ObserverState;
    fn mul(self, s: f64) -> ObserverState {
        ObserverState {
            a_hat: self.a_hat * s,
            b_hat: self.b_hat * s,
            omega_hat: self.omega_hat * s,
        }
    }
}

/// The true extended state `X = (a, b, ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedState {
    pub a: Vector3,
    pub b: Vector3,
    pub omega: Vector3,
}

/// Everything the observer consumes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverInput {
    pub a: Vector3,
    pub b: Vector3,
    pub tau: Vector3,
}

impl ObserverInput {
    pub fn new(meas: &MeasurementPair, tau: Vector3) -> Self {
        ObserverInput {
            a: meas.a.into_inner(),
            b: meas.b.into_inner(),
            tau,
        }
    }
}

pub fn observer_rhs(
    xhat: &ObserverState,
    input: &ObserverInput,
    j: &InertiaDiag,
    gains: &ObserverGains,
) -> ObserverState {
    let ObserverInput { a, b, tau } = *input;
    let ak = gains.alpha * gains.k;
    let k2 = gains.k * gains.k;
    let da = xhat.a_hat - a;
    let db = xhat.b_hat - b;
    ObserverState {
        a_hat: a.cross(&xhat.omega_hat) - da * ak,
        b_hat: b.cross(&xhat.omega_hat) - db * ak,
        omega_hat: j.euler_term(&xhat.omega_hat)
            + j.solve(&tau)
            + a.cross(&da) * k2
            + b.cross(&db) * k2,
    }
}

/// One RK4 step with separate inputs at the start, midpoint and end of the step.
pub fn observer_step_staged(
    xhat: &ObserverState,
    inputs: &[ObserverInput; 3],
    j: &InertiaDiag,
    gains: &ObserverGains,
    dt: f64,
) -> ObserverState {
    let [i0, im, i1] = inputs;
    let k1 = observer_rhs(xhat, i0, j, gains);
    let k2 = observer_rhs(&(*xhat + k1 * (0.5 * dt)), im, j, gains);
    let k3 = observer_rhs(&(*xhat + k2 * (0.5 * dt)), im, j, gains);
    let k4 = observer_rhs(&(*xhat + k3 * dt), i1, j, gains);
    *xhat + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)
}

/// One RK4 step holding the measurement and torque across all stages.
pub fn observer_step(
    xhat: &ObserverState,
    meas: &MeasurementPair,
    tau: Vector3,
    j: &InertiaDiag,
    gains: &ObserverGains,
    dt: f64,
) -> ObserverState {
    let input = ObserverInput::new(meas, tau);
    observer_step_staged(xhat, &[input; 3], j, gains, dt)
}

/// `â = a(0)`, `b̂ = b(0)`, `ω̂ = 0`.
pub fn init_observer(meas0: &MeasurementPair) -> ObserverState {
    ObserverState {
        a_hat: meas0.a.into_inner(),
        b_hat: meas0.b.into_inner(),
        omega_hat: Vector3::ZERO,
    }
}

/// `X̃ = X − X̂` and the scaled norm `|Z| = √(|ã|² + |b̃|² + |ω̃|²/k²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorState {
    pub a_tilde: Vector3,
    pub b_tilde: Vector3,
    pub omega_tilde: Vector3,
    pub z_norm: f64,
}

impl ErrorState {
    pub fn new(truth: &ExtendedState, xhat: &ObserverState, k: f64) -> Self {
        let a_tilde = truth.a - xhat.a_hat;
        let b_tilde = truth.b - xhat.b_hat;
        let omega_tilde = truth.omega - xhat.omega_hat;
        let z_norm = (a_tilde.norm_squared()
            + b_tilde.norm_squared()
            + omega_tilde.norm_squared() / (k * k))
            .sqrt();
        ErrorState {
            a_tilde,
            b_tilde,
            omega_tilde,
            z_norm,
        }
    }
}

pub fn error_trace(
    truth: &[ExtendedState],
    estimates: &[ObserverState],
    k: f64,
) -> Result<Vec<ErrorState>> {
    if truth.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: estimates.len(),
        });
    }
    Ok(truth
        .iter()
        .zip(estimates)
        .map(|(x, xh)| ErrorState::new(x, xh, k))
        .collect())
}

/// Right-hand side of the error dynamics, written directly in the error
/// variables:
///
/// ```text
/// ã' = −αk ã + [a] ω̃
/// b̃' = −αk b̃ + [b] ω̃
/// ω̃' = k²[a] ã + k²[b] b̃ + E(ω) − E(ω̂)
/// ```
pub fn error_rhs(
    err: &ErrorState,
    truth: &ExtendedState,
    omega_hat: &Vector3,
    j: &InertiaDiag,
    gains: &ObserverGains,
) -> [Vector3; 3] {
    let ak = gains.alpha * gains.k;
    let k2 = gains.k * gains.k;
    [
        truth.a.cross(&err.omega_tilde) - err.a_tilde * ak,
        truth.b.cross(&err.omega_tilde) - err.b_tilde * ak,
        truth.a.cross(&err.a_tilde) * k2
            + truth.b.cross(&err.b_tilde) * k2
            + j.euler_term(&truth.omega)
            - j.euler_term(omega_hat),
    ]
}

/// `(|E(ω) − E(ω̂)|, √2·ω_max·|ω̃| + |ω̃|²)` for the quadratic disturbance.
pub fn disturbance_bound(
    j: &InertiaDiag,
    omega: &Vector3,
    omega_hat: &Vector3,
    omega_max: f64,
) -> (f64, f64) {
    let diff = (j.euler_term(omega) - j.euler_term(omega_hat)).norm();
    let e = (*omega - *omega_hat).norm();
    (diff, 2f64.sqrt() * omega_max * e + e * e)
}
