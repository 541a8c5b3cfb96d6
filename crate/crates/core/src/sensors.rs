//! Body-frame vector measurements `a = Rᵀå`, `b = Rᵀb̊` with optional sensor
//! misalignment and Gaussian noise.
//!
//! The Sun direction `å` is observed by a Sun sensor whose frame is related to
//! the body frame by `R_sb`; the normalized magnetic field `b̊` by a
//! magnetometer through `R_mb`. Both rotations follow the attitude convention:
//! a sensor outputs `y = R_xb · v_body` and the body-frame vector is recovered
//! as `v_body = R_xbᵀ y`.
//!
//! Noise is drawn from a counter-based stream keyed on `(seed, sensor, index)`,
//! so a sample can be regenerated without replaying the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RotationMatrix, UnitVector3, Vector3};

/// Minimum `|å × b̊|` for the references to count as independent.
pub const INDEPENDENCE_TOL: f64 = 1e-6;

/// Default per-axis noise standard deviation.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

/// Stream identifiers for the noise generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum SensorId {
    Sun = 0,
    Magnetometer = 1,
}

// 32-bit words reserved per sample; three normals use far fewer.
const WORDS_PER_SAMPLE: u128 = 256;

/// Two constant inertial reference directions with `p = åᵀb̊ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferencePair {
    a_ref: UnitVector3,
    b_ref: UnitVector3,
    p: f64,
}

impl ReferencePair {
    pub fn a_ref(&self) -> &UnitVector3 {
        &self.a_ref
    }

    pub fn b_ref(&self) -> &UnitVector3 {
        &self.b_ref
    }

    /// `åᵀb̊`, in `[0, 1)`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Canonical pair `å = e1`, `b̊ = (p, √(1−p²), 0)`.
    pub fn with_inner_product(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1)")));
        }
        let b = Vector3::new(p, (1.0 - p * p).sqrt(), 0.0);
        canonicalize(UnitVector3::e(0), UnitVector3::new_normalize(b)?)
    }

    /// Keeps `å` and the plane spanned by the pair, and tilts `b̊` so that
    /// `åᵀb̊ = p`.
    pub fn retarget(&self, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1)")));
        }
        let a = *self.a_ref.as_vector();
        let perp = *self.b_ref.as_vector() - a * self.p;
        let u = UnitVector3::new_normalize(perp)?;
        let b = a * p + *u * (1.0 - p * p).sqrt();
        canonicalize(self.a_ref, UnitVector3::new_normalize(b)?)
    }
}

/// Enforces `åᵀb̊ ≥ 0` by flipping `å` if needed, and checks independence.
pub fn canonicalize(a_ref: UnitVector3, b_ref: UnitVector3) -> Result<ReferencePair> {
    let cross_norm = a_ref.cross(&b_ref).norm();
    if !(cross_norm > INDEPENDENCE_TOL) {
        return Err(Error::DependentReferences { cross_norm });
    }
    let mut a_ref = a_ref;
    let mut p = a_ref.dot(&b_ref);
    if p < 0.0 {
        a_ref = UnitVector3::new_normalize(-a_ref.into_inner())?;
        p = -p;
    }
    Ok(ReferencePair {
        a_ref,
        b_ref,
        p: p.min(1.0),
    })
}

impl<'de> Deserialize<'de> for ReferencePair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            a: UnitVector3,
            b: UnitVector3,
        }
        let raw = Raw::deserialize(d)?;
        canonicalize(raw.a, raw.b).map_err(serde::de::Error::custom)
    }
}

/// Sensor mounting and noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    /// Magnetometer frame relative to the body frame.
    #[serde(default = "identity")]
    pub r_mb: RotationMatrix,
    /// Sun-sensor frame relative to the body frame.
    #[serde(default = "identity")]
    pub r_sb: RotationMatrix,
    /// Per-axis standard deviation of the additive Gaussian noise.
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn identity() -> RotationMatrix {
    RotationMatrix::IDENTITY
}

fn default_sigma() -> f64 {
    DEFAULT_NOISE_SIGMA
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            r_mb: RotationMatrix::IDENTITY,
            r_sb: RotationMatrix::IDENTITY,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 0,
        }
    }
}

impl SensorConfig {
    pub fn noiseless() -> Self {
        SensorConfig {
            noise_sigma: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_sigma = {} must be finite and non-negative",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// Body-frame vectors from raw sensor outputs.
    pub fn ingest(&self, y_a: &Vector3, y_b: &Vector3) -> (Vector3, Vector3) {
        (self.r_sb.rotate_inverse(y_a), self.r_mb.rotate_inverse(y_b))
    }

    /// Raw sensor outputs from body-frame vectors.
    pub fn emit(&self, a: &Vector3, b: &Vector3) -> (Vector3, Vector3) {
        (self.r_sb.rotate(a), self.r_mb.rotate(b))
    }
}

/// Three standard normal deviates for sample `index` of `sensor`.
pub fn gaussian_triplet(seed: u64, sensor: SensorId, index: u64) -> Vector3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sensor as u64);
    rng.set_word_pos(index as u128 * WORDS_PER_SAMPLE);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    Vector3::new(draw(), draw(), draw())
}

/// Body-frame measurement pair at time `t` (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementPair {
    pub a: UnitVector3,
    pub b: UnitVector3,
    pub t: f64,
}

/// What the sensors themselves report, in their own frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorReading {
    pub y_a: UnitVector3,
    pub y_b: UnitVector3,
    pub t: f64,
}

/// Produces the sensor outputs for attitude `r` and the body-frame pair the
/// observer consumes after undoing the sensor mounting.
pub fn measure_with_readings(
    r: &RotationMatrix,
    refs: &ReferencePair,
    cfg: &SensorConfig,
    t: f64,
    index: u64,
) -> Result<(SensorReading, MeasurementPair)> {
    let a_body = r.rotate_inverse(refs.a_ref());
    let b_body = r.rotate_inverse(refs.b_ref());
    let (mut y_a, mut y_b) = cfg.emit(&a_body, &b_body);
    if cfg.noise_sigma > 0.0 {
        y_a += gaussian_triplet(cfg.seed, SensorId::Sun, index) * cfg.noise_sigma;
        y_b += gaussian_triplet(cfg.seed, SensorId::Magnetometer, index) * cfg.noise_sigma;
    }
    let y_a = UnitVector3::new_normalize(y_a)?;
    let y_b = UnitVector3::new_normalize(y_b)?;
    let (a, b) = cfg.ingest(&y_a, &y_b);
    Ok((
        SensorReading { y_a, y_b, t },
        MeasurementPair {
            a: UnitVector3::new_normalize(a)?,
            b: UnitVector3::new_normalize(b)?,
            t,
        },
    ))
}

/// Body-frame measurement pair `a = Rᵀå`, `b = Rᵀb̊` (plus noise) for sample `index`.
pub fn measure(
    r: &RotationMatrix,
    refs: &ReferencePair,
    cfg: &SensorConfig,
    t: f64,
    index: u64,
) -> Result<MeasurementPair> {
    measure_with_readings(r, refs, cfg, t, index).map(|(_, m)| m)
}

/// One sample of a noiseless trajectory used to check `ȧ = a × ω`.
#[derive(Debug, Clone, Copy)]
pub struct KinematicSample {
    pub t: f64,
    pub meas: MeasurementPair,
    pub omega: Vector3,
}

/// Largest `|central difference − v × ω|` over `a` and `b` at interior samples.
pub fn measurement_derivative_check(traj: &[KinematicSample]) -> f64 {
    traj.windows(3)
        .map(|w| {
            let h = w[2].t - w[0].t;
            let mid = &w[1];
            let da = (*w[2].meas.a - *w[0].meas.a) * (1.0 / h);
            let db = (*w[2].meas.b - *w[0].meas.b) * (1.0 / h);
            let ra = (da - mid.meas.a.cross(&mid.omega)).norm();
            let rb = (db - mid.meas.b.cross(&mid.omega)).norm();
            ra.max(rb)
        })
        .fold(0.0, f64::max)
}
