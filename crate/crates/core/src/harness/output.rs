use std::io::{self, Write};

use serde_json::json;

use super::run::RunResult;

pub const CSV_HEADER: &str =
    "t,w1,w2,w3,wh1,wh2,wh3,werr,a1,a2,a3,b1,b2,b3,ah1,ah2,ah3,bh1,bh2,bh3";

/// Writes one row per sensor sample. Values use 17 significant digits so
/// they round-trip exactly.
pub fn write_csv<W: Write>(run: &RunResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let mut line = String::with_capacity(512);
    for s in &run.samples {
        line.clear();
        let a = s.meas.a.as_vector();
        let b = s.meas.b.as_vector();
        let fields = [s.t]
            .into_iter()
            .chain(s.truth.omega.0)
            .chain(s.estimate.omega_hat.0)
            .chain([s.error.omega_tilde.norm()])
            .chain(a.0)
            .chain(b.0)
            .chain(s.estimate.a_hat.0)
            .chain(s.estimate.b_hat.0);
        for (i, v) in fields.enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn csv_string(run: &RunResult) -> String {
    let mut buf = Vec::new();
    write_csv(run, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Machine-readable run summary including the gain certificate.
pub fn summary_json(run: &RunResult) -> serde_json::Value {
    let res = &run.scenario;
    json!({
        "gains": { "alpha": res.gains.alpha(), "k": res.gains.k() },
        "omega_max": res.omega_max,
        "dt_sensor": res.config.dt_sensor,
        "t_end": res.config.t_end,
        "observer_substeps": res.observer_substeps,
        "truth_dt": res.truth_dt(),
        "noise_sigma": res.config.sensor.noise_sigma,
        "seed": res.config.sensor.seed,
        "certificate": run.certificate,
        "in_basin": run.in_basin,
        "decay_rate": run.decay.rate,
        "decay_floor_limited": run.decay.floor_limited,
        "decay_window": [run.decay.t_start, run.decay.t_end],
        "initial_error": run.samples.first().map(|s| s.error.omega_tilde.norm()),
        "terminal_error": run.terminal_error(),
        "samples": run.samples.len(),
    })
}

/// A gnuplot script plotting the CSV written to `csv_path`.
pub fn gnuplot_script(csv_path: &str) -> String {
    let esc = csv_path.replace('\\', "\\\\").replace('"', "\\\"");
    format!(
        r#"set datafile separator ","
set key autotitle columnhead
set xlabel "t [s]"
set multiplot layout 2,1
set ylabel "angular velocity [rad/s]"
plot for [i=2:4] "{esc}" using 1:i with lines, \
     for [i=5:7] "{esc}" using 1:i with lines dashtype 2
set logscale y
set ylabel "|w - wh| [rad/s]"
plot "{esc}" using 1:8 with lines
unset multiplot
"#
    )
}
