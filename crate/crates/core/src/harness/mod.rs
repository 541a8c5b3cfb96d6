//! Scenario configuration, simulation runs, sweeps and output formats.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{
    cubesat_inertia, AutoOr, GainSpec, MeasurementHold, ResolvedScenario, ScenarioConfig,
};
pub use output::{csv_string, gnuplot_script, summary_json, write_csv, CSV_HEADER};
pub use run::{
    auto_window, decay_rate, run_scenario, simulate, simulate_from, DecayFit, RunResult, Sample,
};
pub use sweep::{parse_values, sweep, SweepAxis, SweepRow, SweepValue};
