//! `glioma`: runs the named experiments of the glioma therapy model and
//! writes reports, CSV tables and plot scripts.
//!
//! Exit status: 0 on success, 1 when the numerics fail (a diagnostic JSON
//! is printed on stdout), 2 for usage and configuration errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glioma_core::scenarios::{
    diagnostic_json, run_scenario, run_sweep, write_atomic, Format, ScenarioName, ScenarioSpec,
    SweepMetric, SweepSpec,
};
use glioma_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "glioma",
    version,
    about = "Glioma model under chemotherapy and anti-angiogenic therapy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trivial equilibrium: spectrum, Jacobian and the stability conditions.
    #[command(name = "e0-analysis")]
    E0Analysis(Common),
    /// Glioma-free equilibrium, its stability and a long trajectory.
    GliomaFree(Common),
    /// Resistant equilibrium, its stability and a long trajectory.
    Resistant(Common),
    /// Dormancy-rate sweep with the bundled values.
    RhoSweep(Common),
    /// Trajectories from the corners of a box around the stable equilibrium.
    Portrait(Common),
    /// Critical chemotherapy infusion rate for the trivial equilibrium.
    Threshold(Common),
    /// Sweep any parameter over a list of values.
    Sweep {
        #[arg(long, default_value = "rho")]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        #[arg(long, value_parser = parse_metric, default_value = "final-burden")]
        metric: SweepMetric,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario described by a JSON file.
    Run {
        spec: PathBuf,
        /// Overrides the file's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Parameter file replacing the bundled configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, f64)>,
    /// Final time in days.
    #[arg(long)]
    t_end: Option<f64>,
    /// Output root; defaults to $GLIOMA_OUT_DIR, then ./glioma-out.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_format)]
    formats: Option<Vec<Format>>,
    /// Worker threads for sweeps and portraits.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| format!("bad value for `{key}`: {e}"))?;
    Ok((key.trim().to_string(), value))
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<SweepMetric, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown metric `{s}` (known: final-burden, peak-burden)"))
}

impl Common {
    fn into_spec(self, name: ScenarioName) -> ScenarioSpec {
        let mut spec = ScenarioSpec::new(name);
        spec.config = self.config;
        spec.overrides = self.set.into_iter().collect::<BTreeMap<_, _>>();
        if let Some(t) = self.t_end {
            spec.sim.t_end = t;
        }
        spec.out_dir = self.out;
        if let Some(f) = self.formats {
            spec.formats = f;
        }
        spec.jobs = self.jobs;
        spec
    }
}

fn execute(
    command: Command,
) -> (
    String,
    glioma_core::Result<glioma_core::scenarios::ScenarioOutcome>,
    Option<PathBuf>,
) {
    let named = |name: ScenarioName, common: Common| {
        let spec = common.into_spec(name);
        let dir = spec.output_dir();
        (name.to_string(), run_scenario(&spec), Some(dir))
    };
    match command {
        Command::E0Analysis(c) => named(ScenarioName::E0Analysis, c),
        Command::GliomaFree(c) => named(ScenarioName::GliomaFree, c),
        Command::Resistant(c) => named(ScenarioName::Resistant, c),
        Command::RhoSweep(c) => named(ScenarioName::RhoSweep, c),
        Command::Portrait(c) => named(ScenarioName::Portrait, c),
        Command::Threshold(c) => named(ScenarioName::Threshold, c),
        Command::Sweep {
            param,
            values,
            metric,
            common,
        } => {
            let base = common.into_spec(ScenarioName::RhoSweep);
            let dir = base.output_dir();
            let sweep = SweepSpec {
                param,
                values,
                metric,
            };
            ("sweep".into(), run_sweep(&sweep, &base), Some(dir))
        }
        Command::Run { spec, out } => match ScenarioSpec::load(&spec) {
            Ok(mut s) => {
                if out.is_some() {
                    s.out_dir = out;
                }
                let dir = s.output_dir();
                (s.name.to_string(), run_scenario(&s), Some(dir))
            }
            Err(e) => ("run".into(), Err(e), None),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (label, result, dir) = execute(cli.command);
    // write errors (a closed pipe) must not turn a finished run into a failure
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(outcome) => {
            let _ = writeln!(stdout, "{}: {}", outcome.scenario, outcome.headline);
            for f in &outcome.files {
                let _ = writeln!(stdout, "  {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) if err.is_numeric() => {
            let diag = diagnostic_json(&label, &err);
            let text = serde_json::to_string_pretty(&diag).unwrap_or_else(|_| err.to_string());
            if let Some(dir) = dir {
                // best effort: the diagnostic is on stdout either way
                let _ = write_atomic(&dir.join("diagnostic.json"), text.as_bytes());
            }
            let _ = writeln!(stdout, "{text}");
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
