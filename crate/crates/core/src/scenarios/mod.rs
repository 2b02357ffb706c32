//! Named experiments: bundled configurations, scenario runs, parameter
//! sweeps and their artifacts.
//!
//! Every run writes into `<out>/<scenario-name>/` and finishes with a
//! `manifest.json` listing each produced file with its SHA-256 hash.
//! The output root is the scenario's `out_dir`, else `$GLIOMA_OUT_DIR`, else
//! `./glioma-out`.

mod output;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::equilibria::{
    glioma_free_equilibrium, resistant_equilibrium, trivial_equilibrium, EquilibriumReport,
};
use crate::error::{Error, Result};
use crate::model::{apply_overrides, NondimParams, ParameterFile, State};
use crate::simulate::{corner_grid, integrate, phase_portrait, SimConfig, Trajectory};
use crate::stability::{
    analyze_equilibrium, critical_chemo_infusion, theorem1_conditions, trivial_spectrum,
    StabilityReport, Verdict,
};

pub use output::{
    emit_plotscript, plotscript_source, sha256_hex, write_atomic, ArtifactKind, ArtifactWriter,
    Manifest, ManifestEntry,
};
pub use sweep::{run_sweep, SweepMetric, SweepRow, SweepSpec};

/// Environment variable overriding the output root.
pub const OUT_DIR_ENV: &str = "GLIOMA_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "glioma-out";

pub const GLIOMA_FREE_CONFIG: &str = include_str!("../../configs/glioma_free.json");
pub const RESISTANT_CONFIG: &str = include_str!("../../configs/resistant.json");
pub const DIMENSIONAL_CONFIG: &str = include_str!("../../configs/reference_dimensional.json");

/// Initial state used when neither the scenario nor its config supplies one.
pub const DEFAULT_INITIAL_STATE: [f64; 7] = [0.5, 0.3, 0.05, 0.2, 0.9, 0.0, 0.0];

/// Half-width of the portrait corner grid around the equilibrium.
pub const PORTRAIT_OFFSET: f64 = 0.05;
/// Projection `(g1, g3, g4)`.
pub const PORTRAIT_AXES: [usize; 3] = [0, 2, 3];
/// Search range for the critical infusion rate.
pub const THRESHOLD_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    E0Analysis,
    GliomaFree,
    Resistant,
    RhoSweep,
    Portrait,
    Threshold,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::E0Analysis,
        ScenarioName::GliomaFree,
        ScenarioName::Resistant,
        ScenarioName::RhoSweep,
        ScenarioName::Portrait,
        ScenarioName::Threshold,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::E0Analysis => "e0-analysis",
            ScenarioName::GliomaFree => "glioma-free",
            ScenarioName::Resistant => "resistant",
            ScenarioName::RhoSweep => "rho-sweep",
            ScenarioName::Portrait => "portrait",
            ScenarioName::Threshold => "threshold",
        }
    }

    /// Bundled configuration the scenario starts from.
    pub fn bundled_config(self) -> &'static str {
        match self {
            ScenarioName::Resistant | ScenarioName::RhoSweep => RESISTANT_CONFIG,
            _ => GLIOMA_FREE_CONFIG,
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|n| n.as_str()).collect();
                Error::Usage(format!(
                    "unknown scenario `{s}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Plotscript,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "plotscript" => Ok(Format::Plotscript),
            other => Err(Error::Usage(format!(
                "unknown format `{other}` (known: csv, json, plotscript)"
            ))),
        }
    }
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Plotscript]
}

/// Everything needed to run one scenario; also the schema of a JSON run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    /// Parameter file replacing the bundled one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
    /// Applied after the file, keyed by dimensionless parameter name.
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<State>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
    /// Worker threads for sweeps and portraits; `None` uses every core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Only read by `rho-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ScenarioSpec {
    pub fn new(name: ScenarioName) -> Self {
        Self {
            name,
            config: None,
            overrides: BTreeMap::new(),
            initial_state: None,
            sim: SimConfig::default(),
            out_dir: None,
            formats: all_formats(),
            jobs: None,
            sweep: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// The parameter file in effect: `config` if set, else the bundled one.
    pub fn parameter_file(&self) -> Result<ParameterFile> {
        match &self.config {
            Some(path) => ParameterFile::load(path),
            None => ParameterFile::from_json(self.name.bundled_config()),
        }
    }

    /// Validated parameters and initial state after overrides.
    pub fn resolve(&self) -> Result<(NondimParams, State)> {
        let file = self.parameter_file()?;
        let mut p = file.resolve()?;
        apply_overrides(&mut p, &self.overrides)?;
        let s0 = self
            .initial_state
            .or(file.initial_state)
            .unwrap_or(State::from_array(DEFAULT_INITIAL_STATE));
        s0.validate()?;
        self.sim.validate()?;
        if self.jobs == Some(0) {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::Usage(
                "at least one output format is required".into(),
            ));
        }
        Ok((p, s0))
    }

    /// Directory this scenario writes into.
    pub fn output_dir(&self) -> PathBuf {
        let root = self
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        root.join(self.name.as_str())
    }
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: ScenarioName,
    /// One-line human summary.
    pub headline: String,
    pub out_dir: PathBuf,
    /// Every written file, `manifest.json` last.
    pub files: Vec<PathBuf>,
    pub report: serde_json::Value,
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutcome> {
    let (p, s0) = spec.resolve()?;
    let mut w = ArtifactWriter::new(spec.output_dir())?;
    log::info!("running {} into {}", spec.name, w.dir().display());
    let (headline, report) = match spec.name {
        ScenarioName::E0Analysis => e0_analysis(spec, &p, &mut w)?,
        ScenarioName::GliomaFree => {
            let e = glioma_free_equilibrium(&p)?;
            equilibrium_run(spec, &p, &s0, e, "E1", &mut w)?
        }
        ScenarioName::Resistant => {
            let e = resistant_equilibrium(&p)?;
            equilibrium_run(spec, &p, &s0, e, "E2", &mut w)?
        }
        ScenarioName::RhoSweep => {
            let sweep = spec.sweep.clone().unwrap_or_default();
            sweep::sweep_into(&sweep, spec, &p, &s0, &mut w)?
        }
        ScenarioName::Portrait => portrait(spec, &p, &mut w)?,
        ScenarioName::Threshold => threshold(&p),
    };
    if spec.wants(Format::Json) {
        w.write(
            "report.json",
            serde_json::to_string_pretty(&report)?.as_bytes(),
        )?;
    }
    let out_dir = w.dir().to_path_buf();
    let files = w.finish(spec.name.as_str())?;
    Ok(ScenarioOutcome {
        scenario: spec.name,
        headline,
        out_dir,
        files,
        report,
    })
}

/// Machine-readable description of a failed run.
pub fn diagnostic_json(scenario: &str, err: &Error) -> serde_json::Value {
    json!({
        "scenario": scenario,
        "status": if err.is_numeric() { "numeric-failure" } else { "usage-error" },
        "error": err.to_string(),
        "detail": format!("{err:?}"),
    })
}

fn eigen_csv(r: &StabilityReport) -> String {
    let mut out = String::from("index,re,im\n");
    for (k, z) in r.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{k},{:?},{:?}\n", z.re, z.im));
    }
    out
}

fn fmt_point(s: &State) -> String {
    let parts: Vec<String> = s.to_array().iter().map(|v| format!("{v:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn write_linearization(
    spec: &ScenarioSpec,
    stab: &StabilityReport,
    w: &mut ArtifactWriter,
) -> Result<()> {
    if spec.wants(Format::Csv) {
        w.write("jacobian.csv", stab.matrix.to_csv().as_bytes())?;
        w.write("eigenvalues.csv", eigen_csv(stab).as_bytes())?;
    }
    Ok(())
}

fn trajectory_summary(tr: &Trajectory) -> serde_json::Value {
    let burden = tr.burden();
    let (peak_i, peak) = burden
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &b)| if b > acc.1 { (i, b) } else { acc },
        );
    let (t_end, end) = tr.last().expect("trajectory holds the initial state");
    json!({
        "t_end": t_end,
        "final_state": end,
        "final_burden": end.burden(),
        "peak_burden": peak,
        "peak_burden_time": tr.times[peak_i],
        "samples": tr.len(),
        "stats": tr.stats,
    })
}

fn write_trajectory(
    spec: &ScenarioSpec,
    tr: &Trajectory,
    title: &str,
    w: &mut ArtifactWriter,
) -> Result<()> {
    if spec.wants(Format::Csv) || spec.wants(Format::Plotscript) {
        w.write("trajectory.csv", tr.to_csv().as_bytes())?;
    }
    if spec.wants(Format::Json) {
        w.write("trajectory.json", tr.to_json()?.as_bytes())?;
    }
    if spec.wants(Format::Plotscript) {
        emit_plotscript(w, ArtifactKind::Trajectory, "trajectory.csv", title)?;
    }
    Ok(())
}

fn e0_analysis(
    spec: &ScenarioSpec,
    p: &NondimParams,
    w: &mut ArtifactWriter,
) -> Result<(String, serde_json::Value)> {
    let e0 = trivial_equilibrium(p);
    let stab = analyze_equilibrium(&e0, p)?;
    let t1 = theorem1_conditions(p);
    let mut numeric: Vec<f64> = trivial_spectrum(p)?.iter().map(|z| z.re).collect();
    let mut closed = t1.eigenvalues.to_vec();
    numeric.sort_by(f64::total_cmp);
    closed.sort_by(f64::total_cmp);
    let gap = numeric
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    write_linearization(spec, &stab, w)?;
    let headline = format!(
        "E0 = {}: {:?}, spectral abscissa {:.6e}",
        fmt_point(&e0.point),
        stab.verdict,
        stab.spectral_abscissa()
    );
    let report = json!({
        "equilibrium": e0,
        "stability": stab,
        "theorem1": t1,
        "closed_form_spectrum_gap": gap,
    });
    Ok((headline, report))
}

fn equilibrium_run(
    spec: &ScenarioSpec,
    p: &NondimParams,
    s0: &State,
    e: EquilibriumReport,
    label: &str,
    w: &mut ArtifactWriter,
) -> Result<(String, serde_json::Value)> {
    let stab = if e.exists {
        let stab = analyze_equilibrium(&e, p)?;
        write_linearization(spec, &stab, w)?;
        Some(stab)
    } else {
        None
    };
    let tr = integrate(s0, p, &spec.sim)?;
    let title = format!("{} trajectory", spec.name);
    write_trajectory(spec, &tr, &title, w)?;
    let headline = match &stab {
        Some(s) => format!("{label} = {}: {:?}", fmt_point(&e.point), s.classification),
        None => format!("{label} does not exist for these parameters"),
    };
    let report = json!({
        "equilibrium": e,
        "stability": stab,
        "initial_state": s0,
        "sim": spec.sim,
        "trajectory": trajectory_summary(&tr),
    });
    Ok((headline, report))
}

/// The equilibrium the portrait is centred on: `E2` when it exists and is
/// stable, otherwise a stable `E1`.
fn portrait_center(p: &NondimParams) -> Result<(EquilibriumReport, StabilityReport)> {
    let mut tried = Vec::new();
    for e in [resistant_equilibrium(p)?, glioma_free_equilibrium(p)?] {
        if !e.is_valid() {
            continue;
        }
        let stab = analyze_equilibrium(&e, p)?;
        if stab.verdict == Verdict::Stable {
            return Ok((e, stab));
        }
        tried.push(format!("{:?}: {:?}", e.kind, stab.verdict));
    }
    Err(Error::Config(format!(
        "no stable equilibrium to centre the portrait on ({})",
        if tried.is_empty() {
            "none exist".to_string()
        } else {
            tried.join(", ")
        }
    )))
}

fn portrait(
    spec: &ScenarioSpec,
    p: &NondimParams,
    w: &mut ArtifactWriter,
) -> Result<(String, serde_json::Value)> {
    let (e, stab) = portrait_center(p)?;
    let grid = corner_grid(&e.point, PORTRAIT_AXES, PORTRAIT_OFFSET);
    let ens = with_pool(spec.jobs, || {
        phase_portrait(p, &grid, PORTRAIT_AXES, &spec.sim)
    })??;
    if spec.wants(Format::Csv) || spec.wants(Format::Plotscript) {
        w.write("portrait.csv", ens.to_csv().as_bytes())?;
    }
    if spec.wants(Format::Plotscript) {
        emit_plotscript(w, ArtifactKind::Portrait, "portrait.csv", "phase portrait")?;
    }
    let distances: Vec<f64> = ens
        .endpoints()
        .iter()
        .map(|s| s.distance(&e.point))
        .collect();
    let worst = distances.iter().copied().fold(0.0, f64::max);
    let errors: Vec<&str> = ens
        .members
        .iter()
        .filter_map(|m| m.error.as_deref())
        .collect();
    let headline = format!(
        "{} members around {:?}, {} failed, max endpoint distance {worst:.3e}",
        ens.members.len(),
        e.kind,
        ens.failures()
    );
    let report = json!({
        "center": e,
        "classification": stab.classification,
        "axes": ens.axes,
        "offset": PORTRAIT_OFFSET,
        "initial_states": grid,
        "endpoint_distances": distances,
        "failures": errors,
        "sim": spec.sim,
    });
    Ok((headline, report))
}

fn threshold(p: &NondimParams) -> (String, serde_json::Value) {
    let t1 = theorem1_conditions(p);
    let critical = critical_chemo_infusion(p, THRESHOLD_RANGE);
    let closed_form = p.p1 * p.psi * p.a1 / (p.d10 + p.d12 * p.delta / p.gamma);
    let headline = match critical {
        Some(phi) => format!("E0 stabilises for phi > {phi:.6e} (closed form {closed_form:.6e})"),
        None => format!(
            "no infusion rate in [{:e}, {:e}] stabilises E0 (lambda3 = {:.3e}, lambda4 = {:.3e})",
            THRESHOLD_RANGE.0, THRESHOLD_RANGE.1, t1.eigenvalues[2], t1.eigenvalues[3]
        ),
    };
    let report = json!({
        "critical_phi": critical,
        "closed_form_phi": closed_form,
        "search_range": [THRESHOLD_RANGE.0, THRESHOLD_RANGE.1],
        "infusion_independent": {
            "lambda3": t1.eigenvalues[2],
            "lambda4": t1.eigenvalues[3],
        },
        "theorem1": t1,
    });
    (headline, report)
}

/// Runs `f` on a rayon pool of `jobs` threads, or the global pool.
pub(crate) fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
