//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any fails.

use std::time::{Duration, Instant};

use glioma_core::equilibria::{
    cardano_cubic_roots, glioma_free_equilibrium, polynomial_root_oracle, positive_quadratic_root,
    resistant_cap, resistant_equilibrium, trivial_equilibrium, CubicCoefficients, VALID_RESIDUAL,
};
use glioma_core::model::ParameterFile;
use glioma_core::scenarios::{
    run_sweep, ScenarioName, ScenarioSpec, SweepRow, SweepSpec, GLIOMA_FREE_CONFIG,
    RESISTANT_CONFIG,
};
use glioma_core::simulate::{integrate, SimConfig};
use glioma_core::stability::{
    analyze, analyze_equilibrium, critical_chemo_infusion, theorem1_conditions, trivial_spectrum,
    Classification, Verdict,
};
use glioma_core::{NondimParams, State};
use glioma_validation::{
    clear_of_surfaces, jacobian_fd_error, multiset_within, peak, root_mismatch, settle_time,
    stays_below_from,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named sub-check of a criterion.
struct Check {
    name: String,
    ok: bool,
    detail: String,
}

fn check(name: &str, ok: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        ok,
        detail: detail.into(),
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Check {
    check(
        name,
        (got - want).abs() <= tol,
        format!("{got:.6} vs {want} ± {tol}"),
    )
}

fn bundled(text: &str) -> (NondimParams, State) {
    let file = ParameterFile::from_json(text).expect("bundled config parses");
    let p = file.resolve().expect("bundled config resolves");
    (
        p,
        file.initial_state
            .expect("bundled config has an initial state"),
    )
}

fn eq1_reproduction() -> Vec<Check> {
    let (p, _) = bundled(GLIOMA_FREE_CONFIG);
    let e1 = glioma_free_equilibrium(&p).expect("E1 computes");
    let want = [0.99, 0.0, 0.0, 0.65, 0.0, 0.18, 0.0016];
    let got = e1.point.to_array();
    let mut out: Vec<Check> = ["g1", "g2", "g3", "g4", "g5", "q", "y"]
        .iter()
        .enumerate()
        .map(|(i, n)| within(n, got[i], want[i], 0.01))
        .collect();
    out.push(check(
        "residual",
        e1.residual < 1e-8,
        format!("{:e}", e1.residual),
    ));
    out
}

fn eq1_spectrum() -> Vec<Check> {
    let (p, _) = bundled(GLIOMA_FREE_CONFIG);
    let e1 = glioma_free_equilibrium(&p).expect("E1 computes");
    let r = analyze_equilibrium(&e1, &p).expect("spectrum computes");
    let re: Vec<f64> = r.eigenvalues.iter().map(|z| z.re).collect();
    let im = r.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let printed = [-0.001, -0.149, -0.001, -0.009, -0.022, -0.018, -0.007];
    vec![
        check(
            "eigenvalues",
            im == 0.0 && multiset_within(&re, &printed, 2e-3),
            format!("{re:.4?}, max |im| {im:e}"),
        ),
        check(
            "classification",
            r.classification == Classification::StableNode,
            format!("{:?}", r.classification),
        ),
    ]
}

fn eq2_spectrum() -> Vec<Check> {
    let (p, _) = bundled(RESISTANT_CONFIG);
    let e2 = resistant_equilibrium(&p).expect("E2 computes");
    let r = analyze_equilibrium(&e2, &p).expect("spectrum computes");
    let re: Vec<f64> = r.eigenvalues.iter().map(|z| z.re).collect();
    let printed = [
        -0.03996, -0.0181, -0.1554, -0.0025, -0.0048, -0.0024, -0.0046,
    ];
    vec![
        check(
            "real parts",
            multiset_within(&re, &printed, 1e-3),
            format!("{re:.5?}"),
        ),
        check(
            "classification",
            r.classification == Classification::StableSpiral,
            format!("{:?} (want StableSpiral)", r.classification),
        ),
        within("g3", e2.point.g3, 0.62, 0.02),
        within("g4", e2.point.g4, 1.54, 0.05),
        check(
            "q exact",
            e2.point.q == p.phi / p.psi,
            format!("{} vs {}", e2.point.q, p.phi / p.psi),
        ),
    ]
}

fn glioma_free_trajectory() -> Vec<Check> {
    let (p, s0) = bundled(GLIOMA_FREE_CONFIG);
    let tr = integrate(&s0, &p, &SimConfig::with_t_end(10_000.0)).expect("run completes");
    let g2 = tr.component(1);
    let g3 = tr.component(2);
    let (t_peak, g3_peak) = peak(&tr.times, &g3);
    let cleared = stays_below_from(&tr.times, &g2, 1e-3);
    let (_, end) = tr.last().expect("nonempty");
    vec![
        check(
            "g2 < 1e-3 for t >= 250",
            cleared.is_some_and(|t| t <= 250.0),
            format!("below from t = {cleared:?}"),
        ),
        within("g3 peak value", g3_peak, 0.2, 0.05),
        within("g3 peak day", t_peak, 75.0, 15.0),
        within("g1 limit", end.g1, 0.99, 0.01),
        within("g4 limit", end.g4, 0.65, 0.01),
        check(
            "burden limit",
            end.burden().abs() <= 1e-3,
            format!("{:e}", end.burden()),
        ),
    ]
}

fn resistant_trajectory() -> Vec<Check> {
    let (p, s0) = bundled(RESISTANT_CONFIG);
    let tr = integrate(&s0, &p, &SimConfig::with_t_end(10_000.0)).expect("run completes");
    let burden = tr.burden();
    let settled = settle_time(&tr.times, &burden, 0.62, 0.02);
    let (_, end) = tr.last().expect("nonempty");
    vec![
        check(
            "plateau 0.62 ± 0.02 from day 1400 ± 200 to 10000",
            settled.is_some_and(|t| (t - 1400.0).abs() <= 200.0),
            format!(
                "settled at t = {settled:?}, final burden {:.4}",
                end.burden()
            ),
        ),
        within("g4 limit", end.g4, 1.54, 0.05),
    ]
}

fn rho_sweep() -> Vec<Check> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut base = ScenarioSpec::new(ScenarioName::RhoSweep);
    base.out_dir = Some(dir.path().to_path_buf());
    let (p, _) = bundled(RESISTANT_CONFIG);
    let sweep = SweepSpec {
        values: vec![0.001, 0.003, 0.005, 0.006, 0.008, 0.01],
        ..SweepSpec::default()
    };
    let out = run_sweep(&sweep, &base).expect("sweep runs");
    let rows: Vec<SweepRow> =
        serde_json::from_value(out.report["rows"].clone()).expect("rows deserialize");
    let mut checks = vec![check("p3 = 0.006", p.p3 == 0.006, format!("{}", p.p3))];
    for r in rows {
        let label = format!("rho = {}", r.value);
        if r.value >= p.p3 {
            checks.push(check(
                &label,
                r.final_burden < 1e-3,
                format!("final burden {:e} (want < 1e-3)", r.final_burden),
            ));
        } else {
            let mut q = p;
            q.rho = r.value;
            let e2 = resistant_equilibrium(&q).expect("E2 computes");
            let cap = resistant_cap(e2.point.g4, &q);
            let rel = (r.final_burden - cap).abs() / cap;
            checks.push(check(
                &label,
                e2.is_valid() && rel <= 0.05,
                format!(
                    "final burden {:.4} vs cap {cap:.4} (off {:.1}%)",
                    r.final_burden,
                    100.0 * rel
                ),
            ));
        }
    }
    checks
}

fn e0_verdict() -> Vec<Check> {
    let (p, _) = bundled(GLIOMA_FREE_CONFIG);
    let e0 = trivial_equilibrium(&p);
    let r = analyze(&e0.point, &p).expect("spectrum computes");
    let abscissa = r.spectral_abscissa();
    let lambda4 = p.p4 - p.d4 * p.delta / (p.gamma * p.a4);
    let mut stabilised = p;
    stabilised.delta = 2.0 * p.p4 * p.gamma * p.a4 / p.d4;
    stabilised.rho = p.rho.max(p.p3 + 0.01);
    let closed = stabilised.p1 * stabilised.psi * stabilised.a1
        / (stabilised.d10 + stabilised.d12 * stabilised.delta / stabilised.gamma);
    let critical = critical_chemo_infusion(&stabilised, (1e-6, 1e6));
    vec![
        check(
            "max Re = p4 - d4 delta/(gamma a4)",
            (abscissa - lambda4).abs() <= 1e-10 * lambda4.abs(),
            format!("{abscissa:.6e} vs {lambda4:.6e}"),
        ),
        check("max Re > 0", abscissa > 0.0, format!("{abscissa:.6e}")),
        check(
            "verdict Unstable",
            r.verdict == Verdict::Unstable,
            format!("{:?}", r.verdict),
        ),
        check(
            "no threshold at the reference delta",
            critical_chemo_infusion(&p, (1e-6, 1e6)).is_none(),
            "none expected",
        ),
        check(
            "threshold matches closed form",
            critical.is_some_and(|c| (c - closed).abs() <= 1e-6 * closed),
            format!("{critical:?} vs {closed:.6}"),
        ),
    ]
}

fn oracles() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let presets = [NondimParams::glioma_free(), NondimParams::resistant()];

    // (a) 100 states off the switching surfaces
    let mut worst_fd = 0.0f64;
    let mut accepted = 0;
    while accepted < 100 {
        let p = presets[accepted % 2];
        let a: [f64; 7] = std::array::from_fn(|_| rng.gen_range(0.0..2.0));
        let s = State::from_array(a);
        if !clear_of_surfaces(&s, &p) {
            continue;
        }
        worst_fd = worst_fd.max(jacobian_fd_error(&s, &p));
        accepted += 1;
    }

    // (b) 1000 draws each of quadratic and cubic coefficients
    let mut worst_root = 0.0f64;
    for _ in 0..1000 {
        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let a = c[0].abs();
        let (b, cc) = if c[0] < 0.0 {
            (-c[1], -c[2])
        } else {
            (c[1], c[2])
        };
        let oracle = polynomial_root_oracle(&[a, b, cc]).expect("oracle");
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let top = oracle
            .iter()
            .filter(|z| z.im.abs() <= 1e-12 * scale)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let err = match positive_quadratic_root(a, b, cc) {
            Some(r) => (r - top).abs() / scale,
            None if top <= 1e-10 * scale => 0.0,
            None => f64::INFINITY,
        };
        worst_root = worst_root.max(err);

        let l: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let got = cardano_cubic_roots(&CubicCoefficients::monic(l[0], l[1], l[2]));
        let want = polynomial_root_oracle(&[1.0, l[0], l[1], l[2]]).expect("oracle");
        worst_root = worst_root.max(root_mismatch(&got, &want));
    }

    // (c) equilibria stay put
    let mut worst_drift = 0.0f64;
    for p in presets {
        for e in [glioma_free_equilibrium(&p), resistant_equilibrium(&p)] {
            let e = e.expect("equilibrium computes");
            if !e.is_valid() || e.residual >= VALID_RESIDUAL {
                continue;
            }
            let tr = integrate(&e.point, &p, &SimConfig::with_t_end(1000.0)).expect("run");
            worst_drift = worst_drift.max(tr.max_distance(&e.point));
        }
    }

    // (d) agent relaxation with no cells
    let p = NondimParams::glioma_free();
    let q0 = 0.5;
    let s0 = State::new(0.0, 0.0, 0.0, 0.0, 0.0, q0, 0.0);
    let tr = integrate(&s0, &p, &SimConfig::with_t_end(400.0)).expect("run");
    let qs = p.phi / p.psi;
    let worst_q = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| (s.q - (qs + (q0 - qs) * (-p.psi * t).exp())).abs())
        .fold(0.0, f64::max);

    // (e) closed-form spectrum at E0
    let mut worst_e0 = 0.0f64;
    for p in presets {
        let numeric = trivial_spectrum(&p).expect("spectrum");
        let closed: Vec<Complex64> = theorem1_conditions(&p)
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l, 0.0))
            .collect();
        let gap = numeric
            .iter()
            .map(|z| {
                closed
                    .iter()
                    .map(|w| (z - w).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        worst_e0 = worst_e0.max(gap);
    }

    vec![
        check(
            "(a) Jacobian vs FD",
            worst_fd <= 1e-6,
            format!("{worst_fd:e}"),
        ),
        check(
            "(b) roots vs oracle",
            worst_root <= 1e-10,
            format!("{worst_root:e}"),
        ),
        check(
            "(c) equilibrium drift",
            worst_drift < 1e-6,
            format!("{worst_drift:e}"),
        ),
        check(
            "(d) q(t) closed form",
            worst_q <= 1e-8,
            format!("{worst_q:e}"),
        ),
        check(
            "(e) E0 spectrum",
            worst_e0 <= 1e-10,
            format!("{worst_e0:e}"),
        ),
    ]
}

type Criterion = (&'static str, Option<Duration>, fn() -> Vec<Check>);

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "1 glioma-free equilibrium",
            Some(Duration::from_secs(1)),
            eq1_reproduction,
        ),
        (
            "2 glioma-free spectrum",
            Some(Duration::from_secs(1)),
            eq1_spectrum,
        ),
        ("3 resistant spectrum", None, eq2_spectrum),
        (
            "4 glioma-free trajectory",
            Some(Duration::from_secs(10)),
            glioma_free_trajectory,
        ),
        ("5 resistant trajectory", None, resistant_trajectory),
        (
            "6 dormancy-rate sweep",
            Some(Duration::from_secs(30)),
            rho_sweep,
        ),
        ("7 trivial equilibrium verdict", None, e0_verdict),
        ("8 oracle properties", None, oracles),
    ];
    let mut failed = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let mut checks = run();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            checks.push(check(
                "runtime",
                elapsed < limit,
                format!("{elapsed:.2?} (limit {limit:?})"),
            ));
        }
        let ok = checks.iter().all(|c| c.ok);
        println!(
            "{} criterion {name} [{elapsed:.2?}]",
            if ok { "PASS" } else { "FAIL" }
        );
        for c in &checks {
            println!(
                "    {} {}: {}",
                if c.ok { "ok  " } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        if !ok {
            failed.push(name);
        }
    }
    println!("\n{} of 8 criteria passed", 8 - failed.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join("; "));
        std::process::exit(1);
    }
}
