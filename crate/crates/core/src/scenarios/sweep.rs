//! One-parameter sweeps. Entries run concurrently; each writes its own
//! trajectory file and the coordinator writes the tables and the manifest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::output::{
    emit_plotscript, sha256_hex, write_atomic, ArtifactKind, ArtifactWriter, ManifestEntry,
};
use super::{run_scenario, with_pool, Format, ScenarioName, ScenarioOutcome, ScenarioSpec};
use crate::equilibria::{glioma_free_equilibrium, resistant_cap, resistant_equilibrium};
use crate::error::{Error, Result};
use crate::model::{NondimParams, State};
use crate::simulate::integrate;
use crate::stability::{analyze_equilibrium, Classification};

/// Published admissible ranges, for the parameters that have one.
const RANGES: &[(&str, f64, f64)] = &[("u", 0.0, 1.0), ("rho", 0.0, 1.0), ("alpha", 0.0, 10.0)];

/// Quantity reported in the summary's `metric` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMetric {
    /// Burden `g2 + g3` at `t_end`.
    #[default]
    FinalBurden,
    PeakBurden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_param")]
    pub param: String,
    #[serde(default = "default_values")]
    pub values: Vec<f64>,
    #[serde(default)]
    pub metric: SweepMetric,
}

fn default_param() -> String {
    "rho".into()
}

fn default_values() -> Vec<f64> {
    vec![0.001, 0.003, 0.005, 0.006, 0.008, 0.01]
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            param: default_param(),
            values: default_values(),
            metric: SweepMetric::default(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !NondimParams::<f64>::KEYS.contains(&self.param.as_str()) {
            return Err(Error::UnknownKey(self.param.clone()));
        }
        if self.values.is_empty() {
            return Err(Error::Usage("sweep needs at least one value".into()));
        }
        let range = RANGES.iter().find(|(k, _, _)| *k == self.param);
        for &v in &self.values {
            let inside = match range {
                Some(&(_, lo, hi)) => (lo..=hi).contains(&v),
                None => v.is_finite() && v >= 0.0,
            };
            if !inside {
                return Err(Error::InvalidParameter {
                    name: self.param.clone(),
                    value: v,
                    reason: "outside the admissible range",
                });
            }
        }
        Ok(())
    }
}

/// One summary line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// `decay` when `ρ ≥ p3`, `persist` otherwise.
    pub regime: String,
    pub final_burden: f64,
    pub peak_burden: f64,
    pub metric: f64,
    /// `(1 + τ·g4ʳ)(p3 − ρ)/p3` at the resistant equilibrium, when it exists.
    pub cap: Option<f64>,
    /// `E2` in the persistent regime, `E1` otherwise; `none` if it does not exist.
    pub equilibrium: String,
    pub classification: Option<Classification>,
    /// Trajectory file of this entry, relative to the output directory.
    pub file: Option<String>,
}

struct Entry {
    row: SweepRow,
    burden: Vec<(f64, f64)>,
    manifest: Option<ManifestEntry>,
}

fn run_entry(
    k: usize,
    value: f64,
    sweep: &SweepSpec,
    spec: &ScenarioSpec,
    base: &NondimParams,
    s0: &State,
    dir: &std::path::Path,
) -> Result<Entry> {
    let mut p = *base;
    p.set(&sweep.param, value)?;
    p.validate()?;
    let tr = integrate(s0, &p, &spec.sim)?;
    let burden = tr.burden();
    let final_burden = *burden.last().expect("trajectory holds the initial state");
    let peak_burden = burden.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let persist = p.rho < p.p3;
    let e2 = resistant_equilibrium(&p)?;
    let cap = e2.is_valid().then(|| resistant_cap(e2.point.g4, &p));
    let relevant = if persist {
        e2
    } else {
        glioma_free_equilibrium(&p)?
    };
    let (equilibrium, classification) = if relevant.is_valid() {
        let label = if persist { "E2" } else { "E1" };
        (
            label.to_string(),
            Some(analyze_equilibrium(&relevant, &p)?.classification),
        )
    } else {
        ("none".to_string(), None)
    };

    let mut manifest = None;
    let mut file = None;
    if spec.wants(Format::Csv) {
        let name = format!("sweep_{}_{k:02}.csv", sweep.param);
        let csv = tr.to_csv();
        write_atomic(&dir.join(&name), csv.as_bytes())?;
        manifest = Some(ManifestEntry {
            path: name.clone(),
            sha256: sha256_hex(csv.as_bytes()),
            bytes: csv.len() as u64,
        });
        file = Some(name);
    }
    let row = SweepRow {
        value,
        regime: if persist { "persist" } else { "decay" }.to_string(),
        final_burden,
        peak_burden,
        metric: match sweep.metric {
            SweepMetric::FinalBurden => final_burden,
            SweepMetric::PeakBurden => peak_burden,
        },
        cap,
        equilibrium,
        classification,
        file,
    };
    Ok(Entry {
        row,
        burden: tr.times.iter().copied().zip(burden).collect(),
        manifest,
    })
}

fn summary_csv(param: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "param,value,regime,final_burden,peak_burden,metric,cap,equilibrium,classification\n",
    );
    for r in rows {
        let cap = r.cap.map(|c| format!("{c:?}")).unwrap_or_default();
        let class = r
            .classification
            .map(|c| format!("{c:?}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{param},{:?},{},{:?},{:?},{:?},{cap},{},{class}\n",
            r.value, r.regime, r.final_burden, r.peak_burden, r.metric, r.equilibrium
        ));
    }
    out
}

pub(super) fn sweep_into(
    sweep: &SweepSpec,
    spec: &ScenarioSpec,
    base: &NondimParams,
    s0: &State,
    w: &mut ArtifactWriter,
) -> Result<(String, serde_json::Value)> {
    sweep.validate()?;
    let dir = w.dir().to_path_buf();
    let results: Vec<Result<Entry>> = with_pool(spec.jobs, || {
        sweep
            .values
            .par_iter()
            .enumerate()
            .map(|(k, &v)| run_entry(k, v, sweep, spec, base, s0, &dir))
            .collect()
    })?;
    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        entries.push(r?);
    }

    let mut long = String::from("value,t,burden\n");
    for e in &entries {
        for (t, b) in &e.burden {
            long.push_str(&format!("{:?},{t:?},{b:?}\n", e.row.value));
        }
    }
    let rows: Vec<SweepRow> = entries.iter().map(|e| e.row.clone()).collect();
    for e in entries {
        if let Some(m) = e.manifest {
            w.register(m);
        }
    }
    if spec.wants(Format::Csv) || spec.wants(Format::Plotscript) {
        w.write("sweep_burden.csv", long.as_bytes())?;
        w.write(
            "sweep_summary.csv",
            summary_csv(&sweep.param, &rows).as_bytes(),
        )?;
    }
    if spec.wants(Format::Plotscript) {
        let title = format!("burden for varying {}", sweep.param);
        emit_plotscript(w, ArtifactKind::SweepTable, "sweep_burden.csv", &title)?;
    }

    let decayed = rows.iter().filter(|r| r.regime == "decay").count();
    let headline = format!(
        "{} values of {} ({} decay, {} persist)",
        rows.len(),
        sweep.param,
        decayed,
        rows.len() - decayed
    );
    let report = json!({
        "sweep": sweep,
        "p3": base.p3,
        "initial_state": s0,
        "sim": spec.sim,
        "rows": rows,
    });
    Ok((headline, report))
}

/// Runs `sweep` on top of `base`, which supplies config, overrides and
/// solver settings. The result is the `rho-sweep` scenario with these values.
pub fn run_sweep(sweep: &SweepSpec, base: &ScenarioSpec) -> Result<ScenarioOutcome> {
    let spec = ScenarioSpec {
        name: ScenarioName::RhoSweep,
        sweep: Some(sweep.clone()),
        ..base.clone()
    };
    run_scenario(&spec)
}
