//! Closed-form convergence certificate of the observer and numerical checks
//! of each ingredient.
//!
//! In scaled error coordinates `Z = (ã, b̃, ω̃/k)` the error obeys
//! `Ż = kA(t)Z + ξ` with
//!
//! ```text
//!        ⎡ −αI   0    [a] ⎤
//! A(t) = ⎢  0   −αI   [b] ⎥
//!        ⎣ [a]  [b]    0  ⎦
//! ```
//!
//! The certificate bundles the constants that bound this system: `A_m`
//! (bound on `‖A‖`), `K` (overshoot of `e^{As}`), `L` (Lipschitz constant of
//! `A` per unit of `ω_max`), the rate `γ(k)`, the threshold gain `k*` and the
//! basin radius `r(k)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    cross_matrix, eigenvalues, matrix_exp, spectral_norm, symmetric_eigenvalues, Complex, Matrix3,
    Matrix9, RotationMatrix, UnitVector3, Vector3,
};
use crate::observer::{alpha_upper_bound, ErrorState};
use crate::sensors::ReferencePair;

/// The 9×9 frozen-time matrix `A(t)` for measurements `a`, `b`.
pub fn build_a(a: &Vector3, b: &Vector3, alpha: f64) -> Matrix9 {
    let mut m = Matrix9::ZERO;
    let neg = Matrix3::IDENTITY * -alpha;
    let ca = cross_matrix(a);
    let cb = cross_matrix(b);
    m.set_block(0, 0, &neg);
    m.set_block(1, 1, &neg);
    m.set_block(0, 2, &ca);
    m.set_block(1, 2, &cb);
    m.set_block(2, 0, &ca);
    m.set_block(2, 1, &cb);
    m
}

/// `A_m = max(√(2+2α²), √(3+α²))`, an upper bound on `‖A(t)‖`.
pub fn compute_a_m(alpha: f64) -> f64 {
    (2.0 + 2.0 * alpha * alpha)
        .sqrt()
        .max((3.0 + alpha * alpha).sqrt())
}

/// `(K, ln K)` with `K = √((1+q)/(1−q))`, `q = α/(2√(1−p))`.
///
/// `ln K` is evaluated as `½(ln(1+q) − ln(1−q))` so it keeps full relative
/// precision when `K` is close to 1.
pub fn overshoot(alpha: f64, p: f64) -> Result<(f64, f64)> {
    let upper = alpha_upper_bound(p)?;
    if !(alpha >= 0.0 && alpha < upper) {
        return Err(Error::AlphaOutOfRange { alpha, p, upper });
    }
    let q = alpha / upper;
    let big_k = ((1.0 + q) / (1.0 - q)).sqrt();
    let ln_k = 0.5 * (q.ln_1p() - (-q).ln_1p());
    Ok((big_k, ln_k))
}

/// All certified constants for one `(α, p, ω_max, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainCertificate {
    pub alpha: f64,
    pub p: f64,
    pub omega_max: f64,
    pub k: f64,
    pub a_m: f64,
    /// `L = √2·ω_max`.
    pub l: f64,
    /// Overshoot constant `K ≥ 1`.
    pub big_k: f64,
    pub gamma_k: f64,
    /// Gain above which `γ(k) > 0`: `4K·lnK·L/α²`.
    pub gamma_threshold: f64,
    pub k_star: f64,
    /// Basin radius. Zero when `γ(k) ≤ 0`, where the closed form is undefined.
    pub r_k: f64,
    /// `lim_{k→∞} r(k) = (α/2)^{3/2} / (√A_m K³)`.
    pub r_limit: f64,
}

/// `γ(k) = kα/2 − √(K k L ln K)`.
pub fn gamma(alpha: f64, big_k: f64, ln_k: f64, l: f64, k: f64) -> f64 {
    0.5 * k * alpha - (big_k * k * l * ln_k).sqrt()
}

/// `k* = (√lnK + √(lnK + 2αK))²/α² · √2·K·ω_max`.
pub fn k_star(alpha: f64, big_k: f64, ln_k: f64, omega_max: f64) -> f64 {
    let s = ln_k.sqrt() + (ln_k + 2.0 * alpha * big_k).sqrt();
    s * s / (alpha * alpha) * std::f64::consts::SQRT_2 * big_k * omega_max
}

/// `r(k) = (1 − K²√2ω_max/γ)(γ/k)^{3/2} / (√A_m K³)`, or 0 when `γ ≤ 0`.
pub fn basin_radius(a_m: f64, big_k: f64, l: f64, gamma_k: f64, k: f64) -> f64 {
    if gamma_k <= 0.0 {
        return 0.0;
    }
    (1.0 - big_k * big_k * l / gamma_k) * (gamma_k / k).powf(1.5) / (a_m.sqrt() * big_k.powi(3))
}

pub fn compute_certificate(alpha: f64, p: f64, omega_max: f64, k: f64) -> Result<GainCertificate> {
    if !(alpha > 0.0) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            p,
            upper: alpha_upper_bound(p)?,
        });
    }
    let (big_k, ln_k) = overshoot(alpha, p)?;
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "omega_max = {omega_max} must be positive"
        )));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gain k = {k} must be positive"
        )));
    }
    let a_m = compute_a_m(alpha);
    let l = std::f64::consts::SQRT_2 * omega_max;
    let gamma_k = gamma(alpha, big_k, ln_k, l, k);
    Ok(GainCertificate {
        alpha,
        p,
        omega_max,
        k,
        a_m,
        l,
        big_k,
        gamma_k,
        gamma_threshold: 4.0 * big_k * ln_k * l / (alpha * alpha),
        k_star: k_star(alpha, big_k, ln_k, omega_max),
        r_k: basin_radius(a_m, big_k, l, gamma_k, k),
        r_limit: (0.5 * alpha).powf(1.5) / (a_m.sqrt() * big_k.powi(3)),
    })
}

impl GainCertificate {
    /// Same `(α, p, ω_max)` at another gain.
    pub fn at_gain(&self, k: f64) -> Result<GainCertificate> {
        compute_certificate(self.alpha, self.p, self.omega_max, k)
    }

    /// `key: value` lines.
    pub fn report(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GainCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, f64); 12] = [
            ("alpha", self.alpha),
            ("p", self.p),
            ("omega_max", self.omega_max),
            ("k", self.k),
            ("A_m", self.a_m),
            ("L", self.l),
            ("K", self.big_k),
            ("gamma_k", self.gamma_k),
            ("gamma_threshold", self.gamma_threshold),
            ("k_star", self.k_star),
            ("r_k", self.r_k),
            ("r_limit", self.r_limit),
        ];
        for (key, value) in rows {
            writeln!(f, "{key}: {value:.17e}")?;
        }
        Ok(())
    }
}

/// Closed-form frozen-time spectrum of `A(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrozenSpectrum {
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub eigenvalues: Vec<Complex>,
}

impl FrozenSpectrum {
    /// `−α` three times and `(−α ± i√(a_i² − α²))/2` for
    /// `a_2 = 2√2`, `a_3 = 2√(1+p)`, `a_4 = 2√(1−p)`.
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        overshoot(alpha, p)?;
        let a2 = 2.0 * std::f64::consts::SQRT_2;
        let a3 = 2.0 * (1.0 + p).sqrt();
        let a4 = 2.0 * (1.0 - p).sqrt();
        let mut eigenvalues = vec![Complex::new(-alpha, 0.0); 3];
        for ai in [a2, a3, a4] {
            let im = 0.5 * (ai * ai - alpha * alpha).sqrt();
            eigenvalues.push(Complex::new(-0.5 * alpha, im));
            eigenvalues.push(Complex::new(-0.5 * alpha, -im));
        }
        Ok(FrozenSpectrum {
            a2,
            a3,
            a4,
            eigenvalues,
        })
    }
}

/// `n` log-spaced samples on `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![hi],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// The default `s` grid: 50 log-spaced values in `[1e-3, 20]`.
pub fn default_s_samples() -> Vec<f64> {
    log_spaced(1e-3, 20.0, 50)
}

/// `max_s (‖e^{Ms}‖ − K e^{−decay·s})`.
pub fn exp_bound_violation(m: &Matrix9, big_k: f64, decay: f64, s_samples: &[f64]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &s in s_samples {
        let norm = spectral_norm(&matrix_exp(m, s))?;
        worst = worst.max(norm - big_k * (-decay * s).exp());
    }
    Ok(worst)
}

/// `max_s (‖e^{A s}‖ − K e^{−αs/2})` for the frozen matrix of `(a, b)`.
pub fn verify_exp_bound(
    a: &Vector3,
    b: &Vector3,
    alpha: f64,
    big_k: f64,
    s_samples: &[f64],
) -> Result<f64> {
    exp_bound_violation(&build_a(a, b, alpha), big_k, 0.5 * alpha, s_samples)
}

/// The change of basis `P = (P₁|P₂|P₃|P₄)` that block-diagonalizes `A`.
pub fn construct_p(a: &Vector3, b: &Vector3, alpha: f64) -> Result<Matrix9> {
    let p = a.dot(b);
    let one_m_p2 = 1.0 - p * p;
    if !(one_m_p2 > 0.0) {
        return Err(Error::Singular);
    }
    overshoot(alpha, p)?;
    let mu = (8.0 * one_m_p2).sqrt();
    let s = (2.0 * one_m_p2).sqrt();
    let c = a.cross(b);
    let z = Vector3::ZERO;
    let stack = |x: Vector3, y: Vector3, w: Vector3| [x, y, w];
    let cols: [[Vector3; 3]; 9] = [
        stack(*a, z, z),
        stack(z, *b, z),
        stack((*b - *a * p) * (1.0 / s), (*a - *b * p) * (1.0 / s), z),
        stack(
            (*a * p - *b) * (2.0 / mu),
            (*a - *b * p) * (2.0 / mu),
            c * (alpha / mu),
        ),
        stack(z, z, c * (-(8.0 - alpha * alpha).sqrt() / mu)),
        stack(c * (2.0 / mu), c * (2.0 / mu), (*b - *a) * (alpha / mu)),
        stack(
            z,
            z,
            (*a - *b) * ((4.0 * (1.0 + p) - alpha * alpha).sqrt() / mu),
        ),
        stack(c * (2.0 / mu), c * (-2.0 / mu), (*a + *b) * (alpha / mu)),
        stack(
            z,
            z,
            (*a + *b) * (-(4.0 * (1.0 - p) - alpha * alpha).sqrt() / mu),
        ),
    ];
    let mut m = Matrix9::ZERO;
    for (j, col) in cols.iter().enumerate() {
        for (blk, v) in col.iter().enumerate() {
            for i in 0..3 {
                m.0[3 * blk + i][j] = v[i];
            }
        }
    }
    Ok(m)
}

/// The block-diagonal target `diag(−αI₃, M₂, M₃, M₄)` with
/// `M_i = ½[[−α, −√(a_i²−α²)], [√(a_i²−α²), −α]]`.
pub fn block_diagonal_form(alpha: f64, p: f64) -> Result<Matrix9> {
    let spec = FrozenSpectrum::new(alpha, p)?;
    let mut d = Matrix9::diag([-alpha, -alpha, -alpha, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    for (n, ai) in [spec.a2, spec.a3, spec.a4].into_iter().enumerate() {
        let o = 3 + 2 * n;
        let w = 0.5 * (ai * ai - alpha * alpha).sqrt();
        d.0[o][o] = -0.5 * alpha;
        d.0[o + 1][o + 1] = -0.5 * alpha;
        d.0[o][o + 1] = -w;
        d.0[o + 1][o] = w;
    }
    Ok(d)
}

/// The 2×2 blocks `Q_i` of `PᵀP` in the form given alongside the eigenvalue
/// claim: off-diagonal `(α/a_i)√(1 − α/a_i)`.
pub fn printed_q_block(alpha: f64, ai: f64) -> [[f64; 2]; 2] {
    let r = alpha / ai;
    let off = r * (1.0 - r).sqrt();
    [[1.0 + r * r, off], [off, 1.0 - r * r]]
}

/// The blocks actually produced by the explicit `P`: off-diagonal
/// `−(α/a_i)√(1 − α²/a_i²)`, whose eigenvalues are exactly `1 ± α/a_i`.
pub fn derived_q_block(alpha: f64, ai: f64) -> [[f64; 2]; 2] {
    let r = alpha / ai;
    let off = -r * (1.0 - r * r).sqrt();
    [[1.0 + r * r, off], [off, 1.0 - r * r]]
}

/// Numerical certification of the `P` similarity and of `eig(PᵀP)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtpReport {
    pub alpha: f64,
    pub p: f64,
    /// Eigenvalues of the constructed `PᵀP`, ascending.
    pub eigenvalues: [f64; 9],
    /// `{1, 1, 1, 1 ± α/(2√2), 1 ± α/(2√(1+p)), 1 ± α/(2√(1−p))}`, ascending.
    pub closed_form: [f64; 9],
    pub max_eigenvalue_error: f64,
    /// `√(λ_max/λ_min)` of `PᵀP`.
    pub cond_p: f64,
    pub big_k: f64,
    /// Largest entry of `P⁻¹AP` outside the diagonal blocks.
    pub off_block_residual: f64,
    /// Largest entry of `P⁻¹AP − diag(−αI, M₂, M₃, M₄)`.
    pub block_form_residual: f64,
    /// Largest entry of `PᵀP − diag(I, Q₂, Q₃, Q₄)` with the printed `Q_i`.
    pub printed_q_residual: f64,
    /// Same residual against the blocks derived from the explicit `P`.
    pub derived_q_residual: f64,
}

impl PtpReport {
    /// Whether the printed `Q_i` blocks disagree with the constructed `P`.
    pub fn printed_q_mismatch(&self) -> bool {
        self.printed_q_residual > 1e-9
    }
}

fn gram_residual(
    gram: &Matrix9,
    alpha: f64,
    p: f64,
    block: fn(f64, f64) -> [[f64; 2]; 2],
) -> Result<f64> {
    let spec = FrozenSpectrum::new(alpha, p)?;
    let mut want = Matrix9::diag([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    for (n, ai) in [spec.a2, spec.a3, spec.a4].into_iter().enumerate() {
        let o = 3 + 2 * n;
        let q = block(alpha, ai);
        for i in 0..2 {
            for j in 0..2 {
                want.0[o + i][o + j] = q[i][j];
            }
        }
    }
    Ok((*gram - want).max_abs())
}

/// Builds `P` from the pair `(a, b)` and checks it against the closed forms.
pub fn ptp_report(a: &UnitVector3, b: &UnitVector3, alpha: f64) -> Result<PtpReport> {
    let p = a.dot(b);
    let pm = construct_p(a, b, alpha)?;
    let gram = pm.transpose() * pm;
    let eigenvalues = symmetric_eigenvalues(&gram.0)?;

    let mut closed_form = [1.0; 9];
    let spec = FrozenSpectrum::new(alpha, p)?;
    for (n, ai) in [spec.a2, spec.a3, spec.a4].into_iter().enumerate() {
        closed_form[3 + 2 * n] = 1.0 + alpha / ai;
        closed_form[4 + 2 * n] = 1.0 - alpha / ai;
    }
    closed_form.sort_by(f64::total_cmp);
    let max_eigenvalue_error = eigenvalues
        .iter()
        .zip(closed_form.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    if !(eigenvalues[0] > 0.0) {
        return Err(Error::Singular);
    }
    let cond_p = (eigenvalues[8] / eigenvalues[0]).sqrt();
    let (big_k, _) = overshoot(alpha, p)?;

    let similar = pm.inverse()? * build_a(a, b, alpha) * pm;
    let mut off_block_residual: f64 = 0.0;
    let block_of = |i: usize| if i < 3 { 0 } else { 1 + (i - 3) / 2 };
    for i in 0..9 {
        for j in 0..9 {
            if block_of(i) != block_of(j) {
                off_block_residual = off_block_residual.max(similar.0[i][j].abs());
            }
        }
    }
    let block_form_residual = (similar - block_diagonal_form(alpha, p)?).max_abs();

    Ok(PtpReport {
        alpha,
        p,
        eigenvalues,
        closed_form,
        max_eigenvalue_error,
        cond_p,
        big_k,
        off_block_residual,
        block_form_residual,
        printed_q_residual: gram_residual(&gram, alpha, p, printed_q_block)?,
        derived_q_residual: gram_residual(&gram, alpha, p, derived_q_block)?,
    })
}

/// [`ptp_report`] for a fixed generic attitude of the canonical pair with `åᵀb̊ = p`.
pub fn verify_ptp_eigenvalues(alpha: f64, p: f64) -> Result<PtpReport> {
    let refs = ReferencePair::with_inner_product(p)?;
    let axis = UnitVector3::new_normalize(Vector3::new(0.36, -0.48, 0.8))?;
    let r = RotationMatrix::from_axis_angle(&axis, 1.234);
    let a = UnitVector3::new_normalize(r.rotate_inverse(refs.a_ref()))?;
    let b = UnitVector3::new_normalize(r.rotate_inverse(refs.b_ref()))?;
    ptp_report(&a, &b, alpha)
}

/// Frozen-time eigenvalues of `A` for the pair `(a, b)`.
pub fn frozen_eigenvalues(a: &Vector3, b: &Vector3, alpha: f64) -> Result<Vec<Complex>> {
    eigenvalues(&build_a(a, b, alpha))
}

/// A time-stamped measurement pair for Lipschitz sampling.
#[derive(Debug, Clone, Copy)]
pub struct PairSample {
    pub t: f64,
    pub a: Vector3,
    pub b: Vector3,
}

/// `max ‖kA(s) − kA(t)‖ / |s − t|` over sample pairs at most `max_lag`
/// indices apart.
pub fn lipschitz_check(traj: &[PairSample], k: f64, max_lag: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, si) in traj.iter().enumerate() {
        for sj in traj.iter().skip(i + 1).take(max_lag) {
            let dt = (sj.t - si.t).abs();
            if dt == 0.0 {
                continue;
            }
            // α cancels in the difference
            let diff = build_a(&(sj.a - si.a), &(sj.b - si.b), 0.0);
            worst = worst.max(k * spectral_norm(&diff)? / dt);
        }
    }
    Ok(worst)
}

/// Whether the initial error lies in the certified ellipsoid
/// `|ã|² + |b̃|² + |ω̃|²/k² < r(k)²`.
pub fn basin_test(error0: &ErrorState, cert: &GainCertificate) -> Result<bool> {
    if !(cert.r_k > 0.0) {
        return Err(Error::NoCertifiedBasin {
            r_k: cert.r_k,
            k: cert.k,
            k_star: cert.k_star,
        });
    }
    let k = cert.k;
    let z2 = error0.a_tilde.norm_squared()
        + error0.b_tilde.norm_squared()
        + error0.omega_tilde.norm_squared() / (k * k);
    Ok(z2 < cert.r_k * cert.r_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::match_multisets;
    use crate::observer::{ExtendedState, ObserverState};

    #[test]
    fn a_m_examples() {
        assert!((compute_a_m(1.0) - 2.0).abs() < 1e-15);
        assert!((compute_a_m(0.0) - 3f64.sqrt()).abs() < 1e-15);
        assert!((compute_a_m(2.0) - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn a_block_structure() {
        let a = Vector3::new(0.6, 0.8, 0.0);
        let b = Vector3::new(0.0, 0.0, 1.0);
        for alpha in [0.0, 0.3, 1.7] {
            let m = build_a(&a, &b, alpha);
            let sym = m + m.transpose();
            let mut want = Matrix9::diag([-2.0 * alpha; 9]);
            for i in 6..9 {
                want.0[i][i] = 0.0;
            }
            assert!((sym - want).max_abs() < 1e-15);
        }
    }

    #[test]
    fn certificate_reference_values() {
        let c = compute_certificate(1.0, 0.0, 1.0, 20.0).unwrap();
        assert!((c.big_k - 3f64.sqrt()).abs() < 1e-15);
        assert!((c.l - 2f64.sqrt()).abs() < 1e-15);
        assert!(
            (c.k_star - 18.450_257_186_791_62).abs() < 1e-11,
            "{}",
            c.k_star
        );
        // 50-digit evaluation: 4.81247695678555408
        assert!(
            (c.gamma_k - 4.812_476_956_785_554).abs() < 1e-12,
            "{}",
            c.gamma_k
        );
        assert!(c.r_k > 0.0);
    }

    #[test]
    fn certificate_rejects_bad_alpha() {
        assert!(matches!(
            compute_certificate(2.0, 0.0, 1.0, 10.0),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(compute_certificate(1.0, 0.9, 1.0, 10.0).is_err());
        assert!(compute_certificate(-0.1, 0.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn small_alpha_limits() {
        let (k, ln_k) = overshoot(0.0, 0.3).unwrap();
        assert_eq!(k, 1.0);
        assert_eq!(ln_k, 0.0);
        let c = compute_certificate(1e-8, 0.3, 1.0, 10.0).unwrap();
        assert!(c.r_limit < 1e-11);
        assert!((c.big_k - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_form_spectrum_alpha_one() {
        let s = FrozenSpectrum::new(1.0, 0.0).unwrap();
        let want = [
            Complex::new(-1.0, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(-0.5, 1.3228756555322954),
            Complex::new(-0.5, -1.3228756555322954),
            Complex::new(-0.5, 0.8660254037844386),
            Complex::new(-0.5, -0.8660254037844386),
            Complex::new(-0.5, 0.8660254037844386),
            Complex::new(-0.5, -0.8660254037844386),
        ];
        assert!(match_multisets(&s.eigenvalues, &want, 1e-15).is_some());
    }

    #[test]
    fn ptp_alpha_one() {
        let r = verify_ptp_eigenvalues(1.0, 0.0).unwrap();
        assert!(r.max_eigenvalue_error < 1e-12);
        assert!((r.cond_p - 3f64.sqrt()).abs() < 1e-10);
        assert!(r.off_block_residual < 1e-9);
        assert!(r.block_form_residual < 1e-9);
        assert!(r.derived_q_residual < 1e-12);
        assert!(r.printed_q_mismatch());
    }

    #[test]
    fn exp_bound_at_zero_is_identity() {
        let a = Vector3::e(0);
        let b = Vector3::e(1);
        let (big_k, _) = overshoot(1.0, 0.0).unwrap();
        let v = verify_exp_bound(&a, &b, 1.0, big_k, &[0.0]).unwrap();
        assert!((v - (1.0 - big_k)).abs() < 1e-12);
    }

    #[test]
    fn static_body_has_zero_lipschitz_constant() {
        let s: Vec<_> = (0..10)
            .map(|i| PairSample {
                t: i as f64,
                a: Vector3::e(0),
                b: Vector3::e(1),
            })
            .collect();
        assert_eq!(lipschitz_check(&s, 10.0, 5).unwrap(), 0.0);
    }

    #[test]
    fn basin_threshold() {
        let cert = compute_certificate(1.0, 0.0, 1.0, 60.0).unwrap();
        assert!(cert.r_k > 0.0);
        let make = |w: f64| {
            ErrorState::new(
                &ExtendedState {
                    a: Vector3::e(0),
                    b: Vector3::e(1),
                    omega: Vector3::new(w, 0.0, 0.0),
                },
                &ObserverState {
                    a_hat: Vector3::e(0),
                    b_hat: Vector3::e(1),
                    omega_hat: Vector3::ZERO,
                },
                cert.k,
            )
        };
        assert!(basin_test(&make(0.0), &cert).unwrap());
        assert!(basin_test(&make(0.99 * cert.k * cert.r_k), &cert).unwrap());
        assert!(!basin_test(&make(1.01 * cert.k * cert.r_k), &cert).unwrap());

        let low = cert.at_gain(0.5 * cert.k_star).unwrap();
        assert!(matches!(
            basin_test(&make(0.0), &low),
            Err(Error::NoCertifiedBasin { .. })
        ));
    }

    #[test]
    fn report_lines() {
        let c = compute_certificate(1.0, 0.0, 1.0, 20.0).unwrap();
        let text = c.report();
        assert_eq!(text.lines().count(), 12);
        assert!(text.lines().any(|l| l.starts_with("k_star: ")));
    }
}
