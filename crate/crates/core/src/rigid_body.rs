//! Ground-truth attitude kinematics `Ṙ = R[ω]` and Euler equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cross_matrix, reorthonormalize, Matrix3, RotationMatrix, Vector3};

/// Principal moments of inertia `J = diag(J1, J2, J3)` in kg·m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InertiaDiag(Vector3);

impl InertiaDiag {
    /// Checks positivity and the triangle inequality `J_i ≤ J_j + J_k`.
    pub fn new(j1: f64, j2: f64, j3: f64) -> Result<Self> {
        let j = [j1, j2, j3];
        if j.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInertia(format!(
                "moments must be positive and finite, got {j:?}"
            )));
        }
        for i in 0..3 {
            let (a, b) = (j[(i + 1) % 3], j[(i + 2) % 3]);
            // relative slack so that J2 = J3 bodies with tiny J1 survive rounding
            if j[i] > (a + b) * (1.0 + 1e-12) {
                return Err(Error::InvalidInertia(format!(
                    "triangle inequality violated: J{} = {} > {} + {}",
                    i + 1,
                    j[i],
                    a,
                    b
                )));
            }
        }
        Ok(InertiaDiag(Vector3(j)))
    }

    pub fn moments(&self) -> Vector3 {
        self.0
    }

    pub fn matrix(&self) -> Matrix3 {
        Matrix3::diag(self.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.0 .0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `J ω`.
    pub fn apply(&self, w: &Vector3) -> Vector3 {
        self.0.hadamard(w)
    }

    /// `J⁻¹ v`.
    pub fn solve(&self, v: &Vector3) -> Vector3 {
        Vector3([v[0] / self.0[0], v[1] / self.0[1], v[2] / self.0[2]])
    }

    /// Torque-free part of the Euler equations, `E(ω) = J⁻¹(Jω × ω)`.
    pub fn euler_term(&self, w: &Vector3) -> Vector3 {
        self.solve(&self.apply(w).cross(w))
    }

    /// Rotational kinetic energy `½ ωᵀJω`.
    pub fn energy(&self, w: &Vector3) -> f64 {
        0.5 * w.dot(&self.apply(w))
    }

    /// Norm of the body-frame angular momentum `|Jω|`.
    pub fn momentum_norm(&self, w: &Vector3) -> f64 {
        self.apply(w).norm()
    }
}

impl<'de> Deserialize<'de> for InertiaDiag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [j1, j2, j3] = <[f64; 3]>::deserialize(d)?;
        InertiaDiag::new(j1, j2, j3).map_err(serde::de::Error::custom)
    }
}

/// `ω̇ = E(ω) + J⁻¹τ`.
pub fn euler_rhs(j: &InertiaDiag, omega: &Vector3, tau: &Vector3) -> Vector3 {
    j.euler_term(omega) + j.solve(tau)
}

/// Attitude `R` (inertial → body) and body-frame angular velocity `ω` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruthState {
    pub r: RotationMatrix,
    pub omega: Vector3,
}

/// Known external torque `τ(t)` in N·m, body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TorqueProfile {
    /// Free rotation.
    #[default]
    Zero,
    Constant {
        torque: Vector3,
    },
    /// `τ_i(t) = amplitude_i · sin(2π·frequency_hz·t + phase)`.
    Sinusoidal {
        amplitude: Vector3,
        frequency_hz: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl TorqueProfile {
    pub fn at(&self, t: f64) -> Vector3 {
        match *self {
            TorqueProfile::Zero => Vector3::ZERO,
            TorqueProfile::Constant { torque } => torque,
            TorqueProfile::Sinusoidal {
                amplitude,
                frequency_hz,
                phase,
            } => amplitude * (2.0 * std::f64::consts::PI * frequency_hz * t + phase).sin(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            TorqueProfile::Zero => true,
            TorqueProfile::Constant { torque } => torque == Vector3::ZERO,
            TorqueProfile::Sinusoidal { amplitude, .. } => amplitude == Vector3::ZERO,
        }
    }
}

fn kinematics(r: &Matrix3, w: &Vector3) -> Matrix3 {
    *r * cross_matrix(w)
}

/// One RK4 step of `(Ṙ = R[ω], ω̇ = E(ω) + J⁻¹τ(t))`.
///
/// Intermediate stages carry the unprojected `R`; the result is projected
/// back onto the rotations once at the end of the step.
pub fn truth_step(
    state: &TruthState,
    j: &InertiaDiag,
    torque: &TorqueProfile,
    t: f64,
    dt: f64,
) -> Result<TruthState> {
    let r0 = *state.r.matrix();
    let w0 = state.omega;
    let h2 = 0.5 * dt;

    let kr1 = kinematics(&r0, &w0);
    let kw1 = euler_rhs(j, &w0, &torque.at(t));

    let r1 = r0 + kr1 * h2;
    let w1 = w0 + kw1 * h2;
    let kr2 = kinematics(&r1, &w1);
    let kw2 = euler_rhs(j, &w1, &torque.at(t + h2));

    let r2 = r0 + kr2 * h2;
    let w2 = w0 + kw2 * h2;
    let kr3 = kinematics(&r2, &w2);
    let kw3 = euler_rhs(j, &w2, &torque.at(t + h2));

    let r3 = r0 + kr3 * dt;
    let w3 = w0 + kw3 * dt;
    let kr4 = kinematics(&r3, &w3);
    let kw4 = euler_rhs(j, &w3, &torque.at(t + dt));

    let r = r0 + (kr1 + (kr2 + kr3) * 2.0 + kr4) * (dt / 6.0);
    let omega = w0 + (kw1 + (kw2 + kw3) * 2.0 + kw4) * (dt / 6.0);
    Ok(TruthState {
        r: reorthonormalize(&r)?,
        omega,
    })
}

/// `(½ωᵀJω, |Jω|)`.
pub fn invariants_report(state: &TruthState, j: &InertiaDiag) -> (f64, f64) {
    (j.energy(&state.omega), j.momentum_norm(&state.omega))
}

/// A priori bound `√(2T/λ_min(J))` on `|ω(t)|` for free rotation.
///
/// Kinetic energy `T` is conserved when no torque acts, and
/// `λ_min |ω|² ≤ ωᵀJω = 2T`.
pub fn omega_max_bound(
    j: &InertiaDiag,
    state0: &TruthState,
    torque: &TorqueProfile,
) -> Result<f64> {
    if !torque.is_zero() {
        return Err(Error::UnsupportedTorque);
    }
    Ok((2.0 * j.energy(&state0.omega) / j.lambda_min()).sqrt())
}
