use std::path::Path;
use std::process::{Command, Output};

fn glioma(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glioma"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GLIOMA_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn glioma_free_reports_stable_node() {
    let tmp = tempfile::tempdir().unwrap();
    let out = glioma(&["glioma-free", "--t-end", "500"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&tmp.path().join("glioma-free"));
    assert_eq!(r["stability"]["classification"], "StableNode");
    let e1 = &r["equilibrium"]["point"];
    for (key, want) in [("g1", 0.99), ("g4", 0.65), ("q", 0.18), ("y", 0.0016)] {
        let got = e1[key].as_f64().unwrap();
        assert!((got - want).abs() <= 0.01, "{key}: {got}");
    }
}

#[test]
fn e0_analysis_is_unstable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = glioma(&["e0-analysis"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&tmp.path().join("e0-analysis"));
    assert_eq!(r["stability"]["verdict"], "Unstable");
    assert!(String::from_utf8_lossy(&out.stdout).contains("Unstable"));
}

#[test]
fn sweep_writes_summary_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = glioma(
        &[
            "sweep",
            "--param",
            "rho",
            "--values",
            "0.001,0.01",
            "--t-end",
            "300",
            "--jobs",
            "2",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("rho-sweep");
    let summary = std::fs::read_to_string(dir.join("sweep_summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("rho,0.001,persist,"));
    assert!(lines[2].starts_with("rho,0.01,decay,"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["path"] == "sweep_rho_01.csv"));
    assert!(files.iter().any(|f| f["path"] == "sweep_burden.py"));
}

#[test]
fn formats_flag_restricts_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = glioma(
        &["resistant", "--t-end", "50", "--formats", "csv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let dir = tmp.path().join("resistant");
    assert!(dir.join("trajectory.csv").is_file());
    assert!(!dir.join("report.json").exists());
    assert!(!dir.join("trajectory.py").exists());
}

#[test]
fn json_spec_runs_the_same_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"name": "threshold", "overrides": {"delta": 5e-4, "rho": 0.02}, "formats": ["json"]}"#,
    )
    .unwrap();
    let out = glioma(&["run", spec.to_str().unwrap()], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&tmp.path().join("threshold"));
    let got = r["critical_phi"].as_f64().unwrap();
    let want = r["closed_form_phi"].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-6 * want);
}

#[test]
fn environment_variable_sets_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_glioma"))
        .args(["threshold"])
        .env("GLIOMA_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("threshold/manifest.json").is_file());
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(glioma(&["e3"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        glioma(&["threshold", "--set", "zeta=1"], tmp.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        glioma(&["threshold", "--set", "rho"], tmp.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        glioma(&["glioma-free", "--formats", "xml"], tmp.path())
            .status
            .code(),
        Some(2)
    );
    let missing = tmp.path().join("absent.json");
    assert_eq!(
        glioma(
            &["glioma-free", "--config", missing.to_str().unwrap()],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        glioma(&["sweep", "--values", "2.0"], tmp.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numeric_failure_exits_with_one_and_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = glioma(
        &["glioma-free", "--set", "p1=1e308", "--t-end", "10"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let diag: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(diag["status"], "numeric-failure");
    assert_eq!(diag["scenario"], "glioma-free");
    assert!(tmp.path().join("glioma-free/diagnostic.json").is_file());
}

#[test]
fn repeated_runs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = glioma(&["portrait", "--t-end", "200"], dir);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &Path| std::fs::read(d.join("portrait/portrait.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}
