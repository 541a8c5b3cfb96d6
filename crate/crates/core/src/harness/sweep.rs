use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::{Error, Result};

use super::config::{AutoOr, ScenarioConfig};
use super::run::{run_scenario, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Inner product of the reference directions.
    P,
    /// Rotation-rate bound. The initial rate is scaled along with it.
    OmegaMax,
    K,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SweepAxis::P),
            "omega-max" | "omega_max" => Ok(SweepAxis::OmegaMax),
            "k" => Ok(SweepAxis::K),
            other => Err(Error::Config(format!(
                "unknown sweep axis {other:?} (expected p, omega-max or k)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::P => "p",
            SweepAxis::OmegaMax => "omega-max",
            SweepAxis::K => "k",
        })
    }
}

/// A sweep coordinate. `Relative(c)` (written `cx`) means `c` times the base
/// scenario's `ω_max` on the `omega-max` axis and `c·k*` on the `k` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    Absolute(f64),
    Relative(f64),
}

impl FromStr for SweepValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse sweep value {s:?}"));
        match s.strip_suffix('x') {
            Some(m) => m.parse().map(SweepValue::Relative).map_err(|_| bad()),
            None => s.parse().map(SweepValue::Absolute).map_err(|_| bad()),
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Absolute(v) => write!(f, "{v}"),
            SweepValue::Relative(v) => write!(f, "{v}x"),
        }
    }
}

pub fn parse_values(list: &str) -> Result<Vec<SweepValue>> {
    list.split(',').map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: SweepValue,
    /// Resolved coordinate (`p`, `ω_max` or `k`).
    pub coordinate: f64,
    pub k: f64,
    /// Decay rate of `|ω̃|`, fitted on a noiseless replay of the row.
    pub decay_rate: f64,
    pub floor_limited: bool,
    pub terminal_error: f64,
    /// Mean and variance of `|ω̃|` over the second half of the run.
    pub steady_mean: f64,
    pub steady_variance: f64,
}

/// Builds the per-row configurations. `k` is frozen at the base value on the
/// `p` and `omega-max` axes so only the swept quantity changes.
pub fn sweep_configs(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[SweepValue],
) -> Result<Vec<(f64, ScenarioConfig)>> {
    let resolved = base.resolve()?;
    let k_base = resolved.gains.k();
    values
        .iter()
        .map(|&v| {
            let name = |e: Error| Error::Config(format!("sweep value {v} on axis {axis}: {e}"));
            let mut cfg = base.clone();
            let coordinate = match (axis, v) {
                (SweepAxis::P, SweepValue::Absolute(p)) => {
                    cfg.refs = base.refs.retarget(p).map_err(name)?;
                    cfg.gains.k = AutoOr::Value(k_base);
                    p
                }
                (SweepAxis::P, SweepValue::Relative(_)) => {
                    return Err(name(Error::Config("p takes absolute values".into())))
                }
                (SweepAxis::OmegaMax, v) => {
                    let target = match v {
                        SweepValue::Absolute(w) => w,
                        SweepValue::Relative(c) => c * resolved.omega_max,
                    };
                    if !(target > 0.0 && target.is_finite()) {
                        return Err(name(Error::Config("omega_max must be positive".into())));
                    }
                    cfg.omega0 = base.omega0 * (target / resolved.omega_max);
                    cfg.omega_max = AutoOr::Value(target);
                    cfg.gains.k = AutoOr::Value(k_base);
                    target
                }
                (SweepAxis::K, v) => {
                    let k = match v {
                        SweepValue::Absolute(k) => k,
                        SweepValue::Relative(c) => c * resolved.certificate.k_star,
                    };
                    cfg.gains.k = AutoOr::Value(k);
                    k
                }
            };
            cfg.resolve().map_err(name)?;
            Ok((coordinate, cfg))
        })
        .collect()
}

fn summarize(value: SweepValue, coordinate: f64, cfg: &ScenarioConfig) -> Result<SweepRow> {
    let run: RunResult = run_scenario(cfg)?;
    let decay = if cfg.sensor.noise_sigma > 0.0 {
        let mut twin = cfg.clone();
        twin.sensor.noise_sigma = 0.0;
        run_scenario(&twin)?.decay
    } else {
        run.decay
    };
    let (steady_mean, steady_variance) = run.error_stats_from(0.5 * cfg.t_end);
    Ok(SweepRow {
        value,
        coordinate,
        k: run.scenario.gains.k(),
        decay_rate: decay.rate,
        floor_limited: decay.floor_limited,
        terminal_error: run.terminal_error(),
        steady_mean,
        steady_variance,
    })
}

/// Runs one scenario per value, concurrently; rows come back in input order.
pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[SweepValue],
) -> Result<Vec<SweepRow>> {
    let configs = sweep_configs(base, axis, values)?;
    configs
        .par_iter()
        .zip(values.par_iter())
        .map(|((coordinate, cfg), &value)| summarize(value, *coordinate, cfg))
        .collect()
}

pub const SWEEP_HEADER: &str =
    "value,coordinate,k,decay_rate,floor_limited,terminal_error,steady_mean,steady_variance";

pub fn format_rows(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
            r.value,
            r.coordinate,
            r.k,
            r.decay_rate,
            r.floor_limited,
            r.terminal_error,
            r.steady_mean,
            r.steady_variance
        ));
    }
    out
}
