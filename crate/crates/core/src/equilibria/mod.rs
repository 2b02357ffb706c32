//! Equilibria of the dimensionless system.
//!
//! Three families: `E0` with every cell type extinct, the glioma-free `E1`
//! with glia and endothelium at carrying-capacity balance, and the resistant
//! `E2` where only resistant glioma and endothelium persist. Each comes out of
//! a closed-form chain and is then Newton-refined on the equations of its
//! nonzero components.

mod poly;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{kill_rate, rhs, KillTarget, NondimParams, State, G1, G3, G4, Q, Y};
use crate::stability::jacobian;

pub use poly::{
    cardano_cubic_roots, polynomial_root_oracle, positive_quadratic_root, CubicCoefficients,
};

/// Residual below which a report counts as a valid equilibrium.
pub const VALID_RESIDUAL: f64 = 1e-8;
/// Newton stopping residual.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;
/// Bracket for the endothelial component of `E2`.
pub const G4_BRACKET: (f64, f64) = (0.0, 10.0);
const BRACKET_CELLS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Trivial,
    GliomaFree,
    Resistant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    NumericRefined,
}

/// One refined root of the endothelial balance equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub point: State,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    /// Zero state when the equilibrium does not exist.
    pub point: State,
    pub exists: bool,
    pub existence_flags: BTreeMap<String, bool>,
    /// ∞-norm of the right-hand side at `point`.
    pub residual: f64,
    pub method: Method,
    pub newton_iterations: usize,
    /// Fixed-`y` cubic for the endothelial component, evaluated at the returned point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic: Option<CubicCoefficients>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Candidate>,
}

impl EquilibriumReport {
    pub fn is_valid(&self) -> bool {
        self.exists && self.residual < VALID_RESIDUAL && self.point.validate().is_ok()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn absent(kind: EquilibriumKind, flags: BTreeMap<String, bool>, p: &NondimParams) -> Self {
        let point = State::zeros();
        Self {
            kind,
            point,
            exists: false,
            existence_flags: flags,
            residual: rhs(&point, p).max_abs(),
            method: Method::ClosedForm,
            newton_iterations: 0,
            cubic: None,
            candidates: Vec::new(),
        }
    }
}

fn flags(entries: &[(&str, bool)]) -> BTreeMap<String, bool> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `E0 = (0, 0, 0, 0, 0, φ/ψ, δ/γ)`.
pub fn trivial_equilibrium(p: &NondimParams) -> EquilibriumReport {
    let point = State::new(0.0, 0.0, 0.0, 0.0, 0.0, p.phi / p.psi, p.delta / p.gamma);
    EquilibriumReport {
        kind: EquilibriumKind::Trivial,
        point,
        exists: true,
        existence_flags: BTreeMap::new(),
        residual: rhs(&point, p).max_abs(),
        method: Method::ClosedForm,
        newton_iterations: 0,
        cubic: None,
        candidates: Vec::new(),
    }
}

/// Anti-angiogenic balance `y = δ(a4+g4)/((c4+γ)g4 + a4γ)`.
pub fn agent_y_balance(g4: f64, p: &NondimParams) -> f64 {
    p.delta * (p.a4 + g4) / ((p.c4 + p.gamma) * g4 + p.a4 * p.gamma)
}

/// `E1 = (g1ᵇ, 0, 0, g4ᵇ, 0, qᵇ, yᵇ)`.
///
/// `g4ᵇ` and `g1ᵇ` are positive roots of two quadratics obtained by
/// eliminating `y` and `q` through their balance equations.
pub fn glioma_free_equilibrium(p: &NondimParams) -> Result<EquilibriumReport> {
    let g4_ok = p.delta * p.d4 < p.a4 * p.gamma * p.p4;
    let g4 = positive_quadratic_root(
        p.p4 * (p.c4 + p.gamma),
        p.p4 * ((p.a4 - 1.0) * p.gamma - p.c4),
        -p.a4 * p.gamma * p.p4 + p.delta * p.d4,
    );
    let Some(g4) = g4 else {
        return Ok(EquilibriumReport::absent(
            EquilibriumKind::GliomaFree,
            flags(&[
                ("delta_d4_below_a4_gamma_p4", g4_ok),
                ("g4_root_positive", false),
            ]),
            p,
        ));
    };
    let y = agent_y_balance(g4, p);
    let d1 = kill_rate(KillTarget::Glial, g4, y, p);
    let g1_ok = p.phi / p.psi < p.p1 * p.a1 / d1;
    let g1 = positive_quadratic_root(
        p.p1 * (p.c1 + p.psi),
        ((p.a1 - 1.0) * p.psi - p.c1) * p.p1,
        -p.a1 * p.p1 * p.psi + p.phi * d1,
    );
    let mut existence = flags(&[
        ("delta_d4_below_a4_gamma_p4", g4_ok),
        ("g4_root_positive", true),
        ("phi_over_psi_below_p1_a1_over_d1", g1_ok),
    ]);
    let Some(g1) = g1 else {
        existence.insert("g1_root_positive".into(), false);
        return Ok(EquilibriumReport::absent(
            EquilibriumKind::GliomaFree,
            existence,
            p,
        ));
    };
    existence.insert("g1_root_positive".into(), true);
    let q = p.p1 * (1.0 - g1) * (p.a1 + g1) / d1;
    let start = State::new(g1, 0.0, 0.0, g4, 0.0, q, y);
    let (point, iterations) = newton_refine(start, p, &[G1, G4, Q, Y])?;
    Ok(EquilibriumReport {
        kind: EquilibriumKind::GliomaFree,
        point,
        exists: true,
        existence_flags: existence,
        residual: rhs(&point, p).max_abs(),
        method: Method::NumericRefined,
        newton_iterations: iterations,
        cubic: None,
        candidates: Vec::new(),
    })
}

/// Coefficients of the monic endothelial cubic with the agent level `y` held fixed.
pub fn resistant_cubic(p: &NondimParams, y: f64) -> CubicCoefficients {
    let den = p.p3 * p.p4;
    let l2 = ((-p.mu * p.tau + (p.a4 - 1.0) * p.p4) * p.p3 + p.mu * p.rho * p.tau) / den;
    let l3 = (((-p.a4 * p.tau - 1.0) * p.mu + p.d4 * y - p.a4 * p.p4) * p.p3
        + p.rho * p.mu * (p.a4 * p.tau + 1.0))
        / den;
    let l4 = p.a4 * p.mu * (p.rho - p.p3) / den;
    CubicCoefficients::monic(l2, l3, l4)
}

/// `g3 = (1 + τ·g4)(p3 − ρ)/p3`: the resistant load the endothelium supports.
pub fn resistant_cap(g4: f64, p: &NondimParams) -> f64 {
    (1.0 + p.tau * g4) * (p.p3 - p.rho) / p.p3
}

/// Endothelial balance with `g3`, `y` eliminated.
fn endothelial_balance(g4: f64, p: &NondimParams) -> f64 {
    let y = agent_y_balance(g4, p);
    p.mu * resistant_cap(g4, p) + p.p4 * g4 * (1.0 - g4) - p.d4 * y * g4 / (p.a4 + g4)
}

/// `E2 = (0, 0, g3ʳ, g4ʳ, 0, φ/ψ, yʳ)`.
///
/// The cubic's `l3` contains `y`, itself a function of `g4`; the coupled
/// scalar balance is solved on [`G4_BRACKET`] by bisection on every sign
/// change of a uniform scan. Each root is refined on the full state, and the
/// smallest residual wins.
pub fn resistant_equilibrium(p: &NondimParams) -> Result<EquilibriumReport> {
    let g3_ok = p.p3 > p.rho;
    if !g3_ok {
        return Ok(EquilibriumReport::absent(
            EquilibriumKind::Resistant,
            flags(&[("p3_above_rho", false)]),
            p,
        ));
    }
    let q = p.phi / p.psi;
    let (lo, hi) = G4_BRACKET;
    let width = (hi - lo) / BRACKET_CELLS as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = endothelial_balance(a, p);
    for k in 1..=BRACKET_CELLS {
        let b = lo + width * k as f64;
        let fb = endothelial_balance(b, p);
        if fa == 0.0 && a > 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(|x| endothelial_balance(x, p), a, b, fa));
        }
        a = b;
        fa = fb;
    }
    if roots.is_empty() {
        return Ok(EquilibriumReport::absent(
            EquilibriumKind::Resistant,
            flags(&[("p3_above_rho", true), ("g4_bracket_sign_change", false)]),
            p,
        ));
    }

    let mut candidates = Vec::with_capacity(roots.len());
    let mut last_err = None;
    for g4 in roots {
        let y = agent_y_balance(g4, p);
        let start = State::new(0.0, 0.0, resistant_cap(g4, p), g4, 0.0, q, y);
        match newton_refine(start, p, &[G3, G4, Y]) {
            Ok((point, _)) => candidates.push(Candidate {
                point,
                residual: rhs(&point, p).max_abs(),
            }),
            Err(e) => last_err = Some(e),
        }
    }
    let Some(best) = candidates
        .iter()
        .copied()
        .filter(|c| c.point.g4 > 0.0 && c.point.g3 > 0.0)
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
    else {
        return Err(last_err.unwrap_or(Error::NewtonDivergence {
            iterations: NEWTON_MAX_ITER,
            residual: f64::NAN,
        }));
    };

    let point = best.point;
    let cubic = resistant_cubic(p, point.y);
    let (ca, cb) = (cubic.a(), cubic.b());
    let radicand = ca * ca + 4.0 * cb.powi(3);
    let root_positive = if radicand >= 0.0 {
        let big_p = (ca + radicand.sqrt()).cbrt();
        let c2 = 2f64.cbrt();
        big_p != 0.0 && big_p / (3.0 * c2) > c2 * cb / (3.0 * big_p) + cubic.l2 / 3.0
    } else {
        false
    };
    let existence = flags(&[
        ("p3_above_rho", true),
        ("g4_bracket_sign_change", true),
        ("cardano_p_real_printed", ca * ca >= cb),
        ("cardano_p_real", radicand >= 0.0),
        ("cardano_root_positive", root_positive),
    ]);
    // keep the candidate list only when the choice was non-trivial
    let candidates = if candidates.len() > 1 {
        candidates
    } else {
        Vec::new()
    };
    Ok(EquilibriumReport {
        kind: EquilibriumKind::Resistant,
        point,
        exists: true,
        existence_flags: existence,
        residual: best.residual,
        method: Method::NumericRefined,
        newton_iterations: 0,
        cubic: Some(cubic),
        candidates,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Damped Newton on the equations and unknowns listed in `free`; the other
/// components stay fixed. Uses the analytic Jacobian.
pub fn newton_refine(start: State, p: &NondimParams, free: &[usize]) -> Result<(State, usize)> {
    let n = free.len();
    let residual_of = |s: &State| {
        let f = rhs(s, p).to_array();
        free.iter().map(|&i| f[i].abs()).fold(0.0, f64::max)
    };
    let mut x = start;
    let mut res = residual_of(&x);
    for it in 0..NEWTON_MAX_ITER {
        if res < NEWTON_TOL {
            return Ok((x, it));
        }
        let f = rhs(&x, p).to_array();
        let jac = jacobian(&x, p);
        let m = DMatrix::from_fn(n, n, |i, j| jac.get(free[i], free[j]));
        let b = DVector::from_fn(n, |i, _| -f[free[i]]);
        let Some(dx) = m.lu().solve(&b) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let mut trial = x.to_array();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += lambda * dx[k];
            }
            let trial = State::from_array(trial);
            let r = residual_of(&trial);
            if r < res {
                x = trial;
                res = r;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res < NEWTON_TOL {
        Ok((x, NEWTON_MAX_ITER))
    } else {
        Err(Error::NewtonDivergence {
            iterations: NEWTON_MAX_ITER,
            residual: res,
        })
    }
}
