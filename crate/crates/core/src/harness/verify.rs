//! Invariant suite behind the `verify` subcommand.

use std::time::Instant;

use crate::gain::{
    compute_certificate, default_s_samples, frozen_eigenvalues, overshoot, verify_exp_bound,
    verify_ptp_eigenvalues,
};
use crate::linalg::{match_multisets, Complex, RotationMatrix, UnitVector3, Vector3};
use crate::observer::disturbance_bound;
use crate::rigid_body::{invariants_report, truth_step, TorqueProfile, TruthState};
use crate::sensors::ReferencePair;
use crate::Result;

use super::config::{cubesat_inertia, AutoOr, ScenarioConfig};
use super::output::csv_string;
use super::run::run_scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Noiseless CubeSat run at `k = 1.5·k*` whose initial error lies inside the
/// certified basin. `ω_max` is set to four times the energy bound, which is
/// still a valid bound and enlarges the basin enough to contain `ω̂(0) = 0`.
pub fn convergence_scenario(t_end: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(t_end);
    cfg.sensor.noise_sigma = 0.0;
    let auto = cfg.resolve().expect("default scenario is valid").omega_max;
    cfg.omega_max = AutoOr::Value(4.0 * auto);
    cfg
}

/// Small deterministic generator for the sampled checks.
struct Lcg(u64);

impl Lcg {
    fn uniform(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn vector(&mut self, scale: f64) -> Vector3 {
        Vector3::new(
            scale * (2.0 * self.uniform() - 1.0),
            scale * (2.0 * self.uniform() - 1.0),
            scale * (2.0 * self.uniform() - 1.0),
        )
    }

    fn rotation(&mut self) -> RotationMatrix {
        let axis = UnitVector3::new_normalize(self.vector(1.0) + Vector3::new(0.0, 0.0, 1e-3))
            .expect("nonzero axis");
        RotationMatrix::from_axis_angle(&axis, std::f64::consts::PI * self.uniform())
    }
}

fn spectral_check() -> Result<(bool, String)> {
    let refs = ReferencePair::with_inner_product(0.0)?;
    let mut rng = Lcg(7);
    let r = rng.rotation();
    let a = r.rotate_inverse(refs.a_ref());
    let b = r.rotate_inverse(refs.b_ref());
    let eig = frozen_eigenvalues(&a, &b, 1.0)?;
    let s7 = 7f64.sqrt() / 2.0;
    let s3 = 3f64.sqrt() / 2.0;
    let expected = [
        Complex::new(-1.0, 0.0),
        Complex::new(-1.0, 0.0),
        Complex::new(-1.0, 0.0),
        Complex::new(-0.5, s7),
        Complex::new(-0.5, -s7),
        Complex::new(-0.5, s3),
        Complex::new(-0.5, -s3),
        Complex::new(-0.5, s3),
        Complex::new(-0.5, -s3),
    ];
    let eig_err = match_multisets(&eig, &expected, 1e-6);
    let ptp = verify_ptp_eigenvalues(1.0, 0.0)?;
    let cond_err = (ptp.cond_p - ptp.big_k).abs();
    let ok = eig_err.is_some() && ptp.max_eigenvalue_error <= 1e-6 && cond_err <= 1e-8;
    Ok((
        ok,
        format!(
            "eig err {:?}, PtP err {:.2e}, |cond(P) - K| {:.2e}",
            eig_err, ptp.max_eigenvalue_error, cond_err
        ),
    ))
}

fn exp_bound_check() -> Result<(bool, String)> {
    let refs = ReferencePair::with_inner_product(0.0)?;
    let s = default_s_samples();
    let mut rng = Lcg(11);
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5] {
        let (big_k, _) = overshoot(alpha, 0.0)?;
        for _ in 0..5 {
            let r = rng.rotation();
            let a = r.rotate_inverse(refs.a_ref());
            let b = r.rotate_inverse(refs.b_ref());
            worst = worst.max(verify_exp_bound(&a, &b, alpha, big_k, &s)?);
        }
    }
    Ok((worst <= 1e-8, format!("max violation {worst:.2e}")))
}

fn disturbance_check() -> (bool, String) {
    let j = cubesat_inertia();
    let mut rng = Lcg(13);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let omega_max = 0.1 + 5.0 * rng.uniform();
        let mut w = rng.vector(1.0);
        w = w * (omega_max * rng.uniform() / w.norm().max(1e-300));
        let w_hat = rng.vector(2.0 * omega_max);
        let (lhs, rhs) = disturbance_bound(&j, &w, &w_hat, omega_max);
        worst = worst.max(lhs - rhs);
    }
    (worst <= 1e-12, format!("max excess {worst:.2e}"))
}

fn conservation_check() -> Result<(bool, String)> {
    let j = cubesat_inertia();
    let mut state = TruthState {
        r: RotationMatrix::IDENTITY,
        omega: super::config::default_omega0(),
    };
    let (e0, m0) = invariants_report(&state, &j);
    let (mut de, mut dm, mut ortho): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..10_000 {
        state = truth_step(&state, &j, &TorqueProfile::Zero, i as f64 * 0.01, 0.01)?;
        let (e, m) = invariants_report(&state, &j);
        de = de.max((e - e0).abs() / e0);
        dm = dm.max((m - m0).abs() / m0);
        ortho = ortho.max(state.r.matrix().orthogonality_defect());
    }
    let ok = de <= 1e-6 && dm <= 1e-6 && ortho <= 1e-8;
    Ok((
        ok,
        format!("energy {de:.2e}, momentum {dm:.2e}, orthogonality {ortho:.2e}"),
    ))
}

fn convergence_check() -> Result<(bool, String)> {
    let run = run_scenario(&convergence_scenario(80.0))?;
    let late = run
        .samples
        .iter()
        .filter(|s| s.t >= 60.0)
        .map(|s| s.error.omega_tilde.norm())
        .fold(0.0, f64::max);
    let ok = run.in_basin == Some(true) && late < 1e-3 && run.decay.rate < 0.0;
    Ok((
        ok,
        format!(
            "in basin {:?}, max |w~| after 60 s {late:.2e}, decay rate {:.3}",
            run.in_basin, run.decay.rate
        ),
    ))
}

fn threshold_check() -> Result<(bool, String)> {
    let mut bad = 0;
    for (alpha, p, omega_max) in [(1.0, 0.0, 1.5), (0.3, 0.5, 0.2), (1.2, 0.6, 4.0)] {
        let base = compute_certificate(alpha, p, omega_max, 1.0)?;
        let (ks, kg) = (base.k_star, base.gamma_threshold);
        for i in -50..=50 {
            let scale = 1.0 + i as f64 * 1e-6;
            for k in [ks * scale, kg * scale] {
                let c = base.at_gain(k)?;
                if (c.r_k > 0.0) != (k > ks) || (c.gamma_k > 0.0) != (k > kg) {
                    // grid points within one step of the threshold may round either way
                    if (k / ks - 1.0).abs() > 1e-6 && (k / kg - 1.0).abs() > 1e-6 {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok((bad == 0, format!("{bad} misclassified grid points")))
}

fn determinism_check() -> Result<(bool, String)> {
    let mut cfg = ScenarioConfig::new(5.0);
    cfg.sensor.seed = 42;
    let first = csv_string(&run_scenario(&cfg)?);
    let second = csv_string(&run_scenario(&cfg)?);
    Ok((first == second, format!("{} bytes", first.len())))
}

/// Runs every check; errors inside a check count as failures.
pub fn run_all() -> Vec<CheckOutcome> {
    type Check = fn() -> Result<(bool, String)>;
    let checks: [(&'static str, Check); 7] = [
        ("spectral certificate", spectral_check),
        ("exponential bound", exp_bound_check),
        ("disturbance bound", || Ok(disturbance_check())),
        ("conservation", conservation_check),
        ("convergence", convergence_check),
        ("gain thresholds", threshold_check),
        ("determinism", determinism_check),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
