use crate::gain::{basin_test, GainCertificate};
use crate::observer::{
    init_observer, observer_step_staged, ErrorState, ExtendedState, ObserverInput, ObserverState,
};
use crate::rigid_body::{truth_step, TruthState};
use crate::sensors::{measure_with_readings, MeasurementPair, SensorReading};
use crate::{Error, Result};

use super::config::{MeasurementHold, ResolvedScenario, ScenarioConfig};

/// Fraction of the initial error at which the automatic decay window closes.
pub const DECAY_WINDOW_DROP: f64 = 1e-3;

/// One row of a run, on the sensor grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub truth: TruthState,
    /// Noiseless `(a, b, ω)`.
    pub exact: ExtendedState,
    pub reading: SensorReading,
    /// What the observer consumed at this instant.
    pub meas: MeasurementPair,
    pub estimate: ObserverState,
    pub error: ErrorState,
}

/// Least-squares fit of `log|ω̃|` against time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Slope in 1/s.
    pub rate: f64,
    /// Set when nonpositive errors in the requested window had to be dropped.
    pub floor_limited: bool,
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario: ResolvedScenario,
    pub samples: Vec<Sample>,
    pub certificate: GainCertificate,
    /// `None` when the gain leaves no certified basin.
    pub in_basin: Option<bool>,
    pub decay: DecayFit,
}

impl RunResult {
    pub fn decay_rate(&self) -> f64 {
        self.decay.rate
    }

    /// `(t, |ω̃(t)|)` pairs.
    pub fn omega_error_series(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.t, s.error.omega_tilde.norm()))
            .collect()
    }

    pub fn terminal_error(&self) -> f64 {
        self.samples
            .last()
            .map_or(f64::NAN, |s| s.error.omega_tilde.norm())
    }

    /// Mean and population variance of `|ω̃|` over `t ≥ t_from`.
    pub fn error_stats_from(&self, t_from: f64) -> (f64, f64) {
        let tail: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.t >= t_from)
            .map(|s| s.error.omega_tilde.norm())
            .collect();
        let n = tail.len() as f64;
        let mean = tail.iter().sum::<f64>() / n;
        let var = tail.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
        (mean, var)
    }
}

/// Slope of `log e` against `t` over samples with `t` in `[t1, t2]`.
pub fn decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t1, t2) = window;
    let in_window = series.iter().filter(|(t, _)| *t >= t1 && *t <= t2);
    let mut floor_limited = false;
    let mut pts = Vec::new();
    for &(t, e) in in_window {
        if e > 0.0 && e.is_finite() {
            pts.push((t, e.ln()));
        } else {
            floor_limited = true;
        }
    }
    if pts.len() < 2 {
        return Err(Error::EmptyFitWindow);
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyFitWindow);
    }
    Ok(DecayFit {
        rate: sxy / sxx,
        floor_limited,
        t_start: pts[0].0,
        t_end: pts[pts.len() - 1].0,
        points: pts.len(),
    })
}

/// From the first sample until the error first drops below
/// `DECAY_WINDOW_DROP` times its initial value (or the end of the series).
pub fn auto_window(series: &[(f64, f64)]) -> (f64, f64) {
    let Some(&(t0, e0)) = series.first() else {
        return (0.0, 0.0);
    };
    let t_stop = series
        .iter()
        .find(|(_, e)| *e < DECAY_WINDOW_DROP * e0)
        .or(series.last())
        .map_or(t0, |p| p.0);
    (t0, t_stop)
}

fn exact_state(truth: &TruthState, cfg: &ScenarioConfig) -> ExtendedState {
    ExtendedState {
        a: truth.r.rotate_inverse(cfg.refs.a_ref()),
        b: truth.r.rotate_inverse(cfg.refs.b_ref()),
        omega: truth.omega,
    }
}

struct Simulator<'a> {
    res: &'a ResolvedScenario,
    truth: TruthState,
    truth_steps: u64,
    noise_index: u64,
}

impl Simulator<'_> {
    fn time(&self) -> f64 {
        self.truth_steps as f64 * self.res.truth_dt()
    }

    fn advance(&mut self, steps: usize) -> Result<()> {
        let h = self.res.truth_dt();
        let cfg = &self.res.config;
        for _ in 0..steps {
            self.truth = truth_step(&self.truth, &cfg.inertia, &cfg.torque, self.time(), h)?;
            self.truth_steps += 1;
        }
        Ok(())
    }

    fn sample(&mut self) -> Result<(SensorReading, ObserverInput, MeasurementPair)> {
        let cfg = &self.res.config;
        let t = self.time();
        let (reading, meas) =
            measure_with_readings(&self.truth.r, &cfg.refs, &cfg.sensor, t, self.noise_index)?;
        self.noise_index += 1;
        Ok((reading, ObserverInput::new(&meas, cfg.torque.at(t)), meas))
    }
}

/// Simulates truth, sensors and observer for a resolved scenario.
///
/// The observer takes `observer_substeps` RK4 steps per sensor period. With
/// `MeasurementHold::Stage` it is fed a fresh sample at each RK4 stage time;
/// with `MeasurementHold::Zoh` the sample taken at the start of the period
/// is held for the whole period. Rows are recorded on the sensor grid.
pub fn simulate(res: &ResolvedScenario) -> Result<RunResult> {
    simulate_from(res, None)
}

/// Like [`simulate`], starting the observer from `xhat0` instead of
/// `(a(0), b(0), 0)`.
pub fn simulate_from(res: &ResolvedScenario, xhat0: Option<ObserverState>) -> Result<RunResult> {
    let cfg = &res.config;
    let mut sim = Simulator {
        res,
        truth: TruthState {
            r: cfg.attitude0,
            omega: cfg.omega0,
        },
        truth_steps: 0,
        noise_index: 0,
    };
    let k = res.gains.k();
    let h = res.observer_dt();
    let half = res.truth_per_half;

    let (mut reading, mut input, mut meas) = sim.sample()?;
    let mut xhat = xhat0.unwrap_or_else(|| init_observer(&meas));
    let mut samples = Vec::with_capacity(res.periods + 1);
    let record = |sim: &Simulator, reading, meas, xhat: ObserverState| {
        let exact = exact_state(&sim.truth, cfg);
        Sample {
            t: sim.time(),
            truth: sim.truth,
            exact,
            reading,
            meas,
            estimate: xhat,
            error: ErrorState::new(&exact, &xhat, k),
        }
    };
    samples.push(record(&sim, reading, meas, xhat));

    for _ in 0..res.periods {
        let held = input;
        for _ in 0..res.observer_substeps {
            sim.advance(half)?;
            let mid = match cfg.measurement_hold {
                MeasurementHold::Stage => sim.sample()?.1,
                MeasurementHold::Zoh => held,
            };
            sim.advance(half)?;
            let end = match cfg.measurement_hold {
                MeasurementHold::Stage => {
                    let s = sim.sample()?;
                    (reading, meas) = (s.0, s.2);
                    s.1
                }
                MeasurementHold::Zoh => held,
            };
            let start = match cfg.measurement_hold {
                MeasurementHold::Stage => input,
                MeasurementHold::Zoh => held,
            };
            xhat = observer_step_staged(&xhat, &[start, mid, end], &cfg.inertia, &res.gains, h);
            input = end;
        }
        if cfg.measurement_hold == MeasurementHold::Zoh {
            let s = sim.sample()?;
            (reading, input, meas) = s;
        }
        samples.push(record(&sim, reading, meas, xhat));
    }

    let series: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.t, s.error.omega_tilde.norm()))
        .collect();
    let decay = decay_rate(&series, auto_window(&series))?;
    let in_basin = basin_test(&samples[0].error, &res.certificate).ok();
    Ok(RunResult {
        scenario: res.clone(),
        certificate: res.certificate,
        samples,
        in_basin,
        decay,
    })
}

/// Validates, resolves and simulates `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    simulate(&cfg.resolve()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_series_slope() {
        let series: Vec<(f64, f64)> = (0..100)
            .map(|i| {
                let t = i as f64 * 0.05;
                (t, (-2.0 * t).exp())
            })
            .collect();
        let fit = decay_rate(&series, (0.0, 10.0)).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-9);
        assert!(!fit.floor_limited);
    }

    #[test]
    fn constant_series_slope() {
        let series: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.3)).collect();
        assert!(decay_rate(&series, (0.0, 9.0)).unwrap().rate.abs() < 1e-15);
    }

    #[test]
    fn zeros_flag_floor() {
        let series = vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0), (3.0, 0.25)];
        let fit = decay_rate(&series, (0.0, 3.0)).unwrap();
        assert!(fit.floor_limited);
        assert_eq!(fit.points, 3);
        let only_zero = vec![(0.0, 0.0), (1.0, 0.0)];
        assert_eq!(
            decay_rate(&only_zero, (0.0, 1.0)),
            Err(Error::EmptyFitWindow)
        );
    }

    #[test]
    fn window_stops_at_drop() {
        let series: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 0.5f64.powi(i))).collect();
        // 2^-10 < 1e-3 first
        assert_eq!(auto_window(&series), (0.0, 10.0));
    }

    #[test]
    fn short_run_rows() {
        let mut cfg = ScenarioConfig::new(1.0);
        cfg.sensor.noise_sigma = 0.0;
        let run = run_scenario(&cfg).unwrap();
        assert_eq!(run.samples.len(), 11);
        assert!((run.samples[10].t - 1.0).abs() < 1e-12);
        assert_eq!(run.samples[0].error.a_tilde.norm(), 0.0);
    }

    #[test]
    fn exact_start_stays_exact() {
        let mut cfg = ScenarioConfig::new(20.0);
        cfg.sensor.noise_sigma = 0.0;
        let res = cfg.resolve().unwrap();
        let start = ObserverState {
            a_hat: *cfg.refs.a_ref().as_vector(),
            b_hat: *cfg.refs.b_ref().as_vector(),
            omega_hat: cfg.omega0,
        };
        let run = simulate_from(&res, Some(start)).unwrap();
        let worst = run
            .samples
            .iter()
            .map(|s| s.error.omega_tilde.norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst:e}");
    }
}
