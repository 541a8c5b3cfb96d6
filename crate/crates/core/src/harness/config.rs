use serde::{Deserialize, Deserializer};

use crate::gain::{compute_certificate, GainCertificate};
use crate::linalg::{RotationMatrix, Vector3};
use crate::observer::{default_alpha, ObserverGains};
use crate::rigid_body::{omega_max_bound, InertiaDiag, TorqueProfile, TruthState};
use crate::sensors::{ReferencePair, SensorConfig};
use crate::{Error, Result};

/// Default multiple of `k*` used when the gain is `"auto"`.
pub const DEFAULT_K_FACTOR: f64 = 1.5;
pub const DEFAULT_DT_SENSOR: f64 = 0.1;
pub const DEFAULT_TRUTH_SUBSTEPS: usize = 10;

/// Largest `k·h·√2` accepted for one observer RK4 sub-step when the sub-step
/// count is chosen automatically.
pub const MAX_SCALED_STEP: f64 = 0.25;

/// Homogeneous 20 cm × 10 cm × 10 cm, 2 kg parallelepiped.
pub fn cubesat_inertia() -> InertiaDiag {
    let (l, w, h, m) = (0.2, 0.1, 0.1, 2.0);
    let c = m / 12.0;
    InertiaDiag::new(
        c * (w * w + h * h),
        c * (l * l + h * h),
        c * (l * l + w * w),
    )
    .expect("parallelepiped inertia is physical")
}

/// `(30, 10, 50)` deg/s.
pub fn default_omega0() -> Vector3 {
    Vector3::new(30.0, 10.0, 50.0) * (std::f64::consts::PI / 180.0)
}

/// Either the literal string `"auto"` or an explicit value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AutoOr<T> {
    #[default]
    Auto,
    Value(T),
}

impl<T> AutoOr<T> {
    pub fn value(self) -> Option<T> {
        match self {
            AutoOr::Auto => None,
            AutoOr::Value(v) => Some(v),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for AutoOr<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Word(String),
            Value(T),
        }
        match Raw::<T>::deserialize(d)
            .map_err(|_| serde::de::Error::custom("expected \"auto\" or an explicit value"))?
        {
            Raw::Word(w) if w == "auto" => Ok(AutoOr::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "unknown keyword {w:?}, expected \"auto\""
            ))),
            Raw::Value(v) => Ok(AutoOr::Value(v)),
        }
    }
}

/// Gain selection. `"auto"` means `α = √(1−p)`, `k = 1.5·k*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSpec {
    pub alpha: AutoOr<f64>,
    pub k: AutoOr<f64>,
    /// Multiple of `k*` used when `k` is automatic.
    pub k_factor: f64,
}

impl Default for GainSpec {
    fn default() -> Self {
        GainSpec {
            alpha: AutoOr::Auto,
            k: AutoOr::Auto,
            k_factor: DEFAULT_K_FACTOR,
        }
    }
}

impl<'de> Deserialize<'de> for GainSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        fn default_factor() -> f64 {
            DEFAULT_K_FACTOR
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Explicit {
            #[serde(default)]
            alpha: AutoOr<f64>,
            #[serde(default)]
            k: AutoOr<f64>,
            #[serde(default = "default_factor")]
            k_factor: f64,
        }
        let value = serde_json::Value::deserialize(d)?;
        if value.as_str() == Some("auto") {
            return Ok(GainSpec::default());
        }
        let e: Explicit = serde_json::from_value(value).map_err(serde::de::Error::custom)?;
        Ok(GainSpec {
            alpha: e.alpha,
            k: e.k,
            k_factor: e.k_factor,
        })
    }
}

/// How measurements enter the observer between sensor samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementHold {
    /// Fresh samples at every RK4 stage time.
    #[default]
    Stage,
    /// One sample per sensor period, held constant.
    Zoh,
}

fn default_refs() -> ReferencePair {
    ReferencePair::with_inner_product(0.0).expect("orthogonal pair")
}

fn default_dt() -> f64 {
    DEFAULT_DT_SENSOR
}

fn default_truth_substeps() -> usize {
    DEFAULT_TRUTH_SUBSTEPS
}

fn identity() -> RotationMatrix {
    RotationMatrix::IDENTITY
}

/// One simulation scenario, read from JSON. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "cubesat_inertia")]
    pub inertia: InertiaDiag,
    /// Initial body angular velocity, rad/s.
    #[serde(default = "default_omega0")]
    pub omega0: Vector3,
    #[serde(default = "identity")]
    pub attitude0: RotationMatrix,
    #[serde(default = "default_refs")]
    pub refs: ReferencePair,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub gains: GainSpec,
    #[serde(default = "default_dt")]
    pub dt_sensor: f64,
    pub t_end: f64,
    #[serde(default)]
    pub torque: TorqueProfile,
    #[serde(default)]
    pub omega_max: AutoOr<f64>,
    /// Truth RK4 steps per sensor period.
    #[serde(default = "default_truth_substeps")]
    pub truth_substeps: usize,
    /// Observer RK4 steps per sensor period.
    #[serde(default)]
    pub observer_substeps: AutoOr<usize>,
    #[serde(default)]
    pub measurement_hold: MeasurementHold,
}

impl ScenarioConfig {
    /// Defaults everywhere, with the given duration.
    pub fn new(t_end: f64) -> Self {
        ScenarioConfig {
            inertia: cubesat_inertia(),
            omega0: default_omega0(),
            attitude0: RotationMatrix::IDENTITY,
            refs: default_refs(),
            sensor: SensorConfig::default(),
            gains: GainSpec::default(),
            dt_sensor: DEFAULT_DT_SENSOR,
            t_end,
            torque: TorqueProfile::Zero,
            omega_max: AutoOr::Auto,
            truth_substeps: DEFAULT_TRUTH_SUBSTEPS,
            observer_substeps: AutoOr::Auto,
            measurement_hold: MeasurementHold::Stage,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Validates everything and fills in the automatic values.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let cfg_err = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        if !(self.dt_sensor > 0.0 && self.dt_sensor.is_finite()) {
            return Err(Error::Config(format!(
                "dt_sensor = {} must be positive",
                self.dt_sensor
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end = {} must be positive",
                self.t_end
            )));
        }
        if !self.omega0.is_finite() {
            return Err(Error::Config("omega0 must be finite".into()));
        }
        if self.truth_substeps == 0 {
            return Err(Error::Config("truth_substeps must be at least 1".into()));
        }
        if self.observer_substeps == AutoOr::Value(0) {
            return Err(Error::Config("observer_substeps must be at least 1".into()));
        }
        self.sensor.validate().map_err(cfg_err)?;

        let p = self.refs.p();
        let state0 = TruthState {
            r: self.attitude0,
            omega: self.omega0,
        };
        let omega_max = match self.omega_max {
            AutoOr::Value(w) => w,
            AutoOr::Auto => {
                omega_max_bound(&self.inertia, &state0, &self.torque).map_err(cfg_err)?
            }
        };
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::Config(format!(
                "omega_max = {omega_max} must be positive"
            )));
        }
        let alpha = self.gains.alpha.value().unwrap_or_else(|| default_alpha(p));
        // validates α against p before k* is formed
        ObserverGains::new(alpha, 1.0, p).map_err(cfg_err)?;
        let base = compute_certificate(alpha, p, omega_max, 1.0).map_err(cfg_err)?;
        let k = match self.gains.k {
            AutoOr::Value(k) => k,
            AutoOr::Auto => {
                if !(self.gains.k_factor > 0.0 && self.gains.k_factor.is_finite()) {
                    return Err(Error::Config(format!(
                        "k_factor = {} must be positive",
                        self.gains.k_factor
                    )));
                }
                self.gains.k_factor * base.k_star
            }
        };
        let gains = ObserverGains::new(alpha, k, p).map_err(cfg_err)?;
        let certificate = base.at_gain(k).map_err(cfg_err)?;

        let samples = (self.t_end / self.dt_sensor).round();
        if !(1.0..=1e8).contains(&samples) {
            return Err(Error::Config(format!(
                "t_end / dt_sensor = {} must be a positive sample count",
                self.t_end / self.dt_sensor
            )));
        }
        let observer_substeps = match self.observer_substeps {
            AutoOr::Value(n) => n,
            AutoOr::Auto => auto_observer_substeps(k, self.dt_sensor),
        };
        let truth_per_half = self.truth_substeps.div_ceil(2 * observer_substeps).max(1);

        Ok(ResolvedScenario {
            config: self.clone(),
            gains,
            omega_max,
            certificate,
            periods: samples as usize,
            observer_substeps,
            truth_per_half,
        })
    }
}

/// Smallest sub-step count keeping `k·h·√2 ≤ MAX_SCALED_STEP`.
pub fn auto_observer_substeps(k: f64, dt: f64) -> usize {
    ((k * dt * std::f64::consts::SQRT_2 / MAX_SCALED_STEP).ceil() as usize).max(1)
}

/// A validated scenario with every automatic value filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub config: ScenarioConfig,
    pub gains: ObserverGains,
    pub omega_max: f64,
    pub certificate: GainCertificate,
    /// Number of sensor periods simulated.
    pub periods: usize,
    /// Observer RK4 steps per sensor period.
    pub observer_substeps: usize,
    /// Truth RK4 steps per half observer step.
    pub truth_per_half: usize,
}

impl ResolvedScenario {
    pub fn observer_dt(&self) -> f64 {
        self.config.dt_sensor / self.observer_substeps as f64
    }

    pub fn truth_dt(&self) -> f64 {
        self.observer_dt() / (2 * self.truth_per_half) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubesat_moments() {
        let j = cubesat_inertia().moments();
        assert!((j[0] - 1.0 / 300.0).abs() < 1e-15);
        assert!((j[1] - 1.0 / 120.0).abs() < 1e-15);
        assert_eq!(j[1], j[2]);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ScenarioConfig::from_json(r#"{"t_end": 5}"#).unwrap();
        assert_eq!(cfg, ScenarioConfig::new(5.0));
        let res = cfg.resolve().unwrap();
        assert_eq!(res.periods, 50);
        assert!((res.gains.alpha() - 1.0).abs() < 1e-15);
        assert!((res.gains.k() - 1.5 * res.certificate.k_star).abs() < 1e-12 * res.gains.k());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_json(r#"{"t_end": 5, "t_ned": 3}"#).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("t_ned")),
            "{err}"
        );
        let err = ScenarioConfig::from_json(r#"{"t_end": 5, "gains": {"kk": 3}}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn gain_forms() {
        let cfg =
            ScenarioConfig::from_json(r#"{"t_end": 1, "gains": {"alpha": 0.5, "k": 30}}"#).unwrap();
        assert_eq!(cfg.gains.alpha, AutoOr::Value(0.5));
        assert_eq!(cfg.gains.k, AutoOr::Value(30.0));
        let cfg = ScenarioConfig::from_json(r#"{"t_end": 1, "gains": "auto"}"#).unwrap();
        assert_eq!(cfg.gains, GainSpec::default());
        let cfg = ScenarioConfig::from_json(r#"{"t_end": 1, "gains": {"k_factor": 3}}"#).unwrap();
        assert_eq!(cfg.gains.k_factor, 3.0);
        assert!(ScenarioConfig::from_json(r#"{"t_end": 1, "gains": "manual"}"#).is_err());
    }

    #[test]
    fn alpha_out_of_range_is_config_error() {
        let cfg = ScenarioConfig::from_json(r#"{"t_end": 1, "gains": {"alpha": 2.5}}"#).unwrap();
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn torque_needs_explicit_omega_max() {
        let text = r#"{"t_end": 1, "torque": {"kind": "constant", "torque": [0, 0, 1e-6]}}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
        let text = r#"{"t_end": 1, "omega_max": 2,
                       "torque": {"kind": "constant", "torque": [0, 0, 1e-6]}}"#;
        assert!(ScenarioConfig::from_json(text).unwrap().resolve().is_ok());
    }

    #[test]
    fn bad_durations() {
        for text in [
            r#"{"t_end": 0}"#,
            r#"{"t_end": -1}"#,
            r#"{"t_end": 1, "dt_sensor": 0}"#,
            r#"{"t_end": 1, "truth_substeps": 0}"#,
            r#"{"t_end": 1, "observer_substeps": 0}"#,
            r#"{"t_end": 1, "omega_max": "big"}"#,
        ] {
            let r = ScenarioConfig::from_json(text).and_then(|c| c.resolve());
            assert!(matches!(r, Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn substep_layout() {
        assert_eq!(auto_observer_substeps(0.1, 0.1), 1);
        assert_eq!(auto_observer_substeps(41.5, 0.1), 24);
        let mut cfg = ScenarioConfig::new(1.0);
        cfg.observer_substeps = AutoOr::Value(1);
        let r = cfg.resolve().unwrap();
        assert_eq!(r.truth_per_half, 5);
        assert!((r.truth_dt() - 0.01).abs() < 1e-15);
        cfg.observer_substeps = AutoOr::Value(24);
        assert_eq!(cfg.resolve().unwrap().truth_per_half, 1);
    }
}
