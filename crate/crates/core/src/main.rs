use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gyroless::harness::sweep::format_rows;
use gyroless::harness::verify::run_all;
use gyroless::harness::{
    gnuplot_script, parse_values, run_scenario, summary_json, sweep, write_csv, ScenarioConfig,
    SweepAxis,
};
use gyroless::Error;

/// Environment variable overriding the configured noise seed.
const SEED_ENV: &str = "GYROLESS_SEED";

#[derive(Parser)]
#[command(
    version,
    about = "Angular-velocity observer driven by two vector measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write the trajectory as CSV.
    Simulate {
        config: PathBuf,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed; overrides GYROLESS_SEED and the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Write a JSON run summary with the gain certificate.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Write a gnuplot script plotting the CSV (requires --out).
        #[arg(long, requires = "out")]
        gnuplot: Option<PathBuf>,
    },
    /// Print the gain certificate for a scenario.
    Certificate {
        config: PathBuf,
        /// Print JSON instead of key: value lines.
        #[arg(long)]
        json: bool,
    },
    /// Run one scenario per value along an axis.
    Sweep {
        config: PathBuf,
        /// p, omega-max or k.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; a trailing `x` means a multiple of the
        /// base ω_max (omega-max axis) or of k* (k axis).
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on built-in scenarios.
    Verify,
}

enum Failure {
    Config(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::from_path(path)?;
    let env = match std::env::var(SEED_ENV) {
        Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| {
            Failure::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
        })?),
        Err(_) => None,
    };
    if let Some(s) = seed.or(env) {
        cfg.sensor.seed = s;
    }
    Ok(cfg)
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            summary,
            gnuplot,
        } => {
            let cfg = load(&config, seed)?;
            let result = run_scenario(&cfg)?;
            if result
                .samples
                .iter()
                .any(|s| !s.estimate.omega_hat.is_finite())
            {
                return Err(Failure::Invariant(
                    "observer state became non-finite".into(),
                ));
            }
            let mut w = output(out.as_deref())?;
            write_csv(&result, &mut w)?;
            w.flush()?;
            if let Some(path) = summary {
                let text = serde_json::to_string_pretty(&summary_json(&result))
                    .map_err(|e| Failure::Invariant(e.to_string()))?;
                std::fs::write(path, text + "\n")?;
            }
            if let (Some(script), Some(csv)) = (gnuplot, out) {
                std::fs::write(script, gnuplot_script(&csv.to_string_lossy()))?;
            }
        }
        Command::Certificate { config, json } => {
            let res = load(&config, None)?.resolve()?;
            if json {
                let text = serde_json::to_string_pretty(&res.certificate)
                    .map_err(|e| Failure::Invariant(e.to_string()))?;
                println!("{text}");
            } else {
                print!("{}", res.certificate.report());
            }
        }
        Command::Sweep {
            config,
            axis,
            values,
            seed,
            out,
        } => {
            let cfg = load(&config, seed)?;
            let axis: SweepAxis = axis.parse()?;
            let rows = sweep(&cfg, axis, &parse_values(&values)?)?;
            let mut w = output(out.as_deref())?;
            w.write_all(format_rows(&rows).as_bytes())?;
            w.flush()?;
        }
        Command::Verify => {
            let outcomes = run_all();
            for o in &outcomes {
                println!(
                    "{} {:<22} {:>7.2}s  {}",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.name,
                    o.seconds,
                    o.detail
                );
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(Failure::Invariant(format!("{failed} check(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
