//! Closed-form stability conditions for `E0` and `E1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::eigen::eigenvalues;
use super::jacobian::jacobian;
use crate::equilibria::{trivial_equilibrium, EquilibriumKind, EquilibriumReport};
use crate::model::{kill_rate, KillTarget, NondimParams, G1, G4, Q, Y};

/// Conditions for `E0` with the closed-form spectrum of its triangular Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1 {
    /// `λ1..λ7` in component order.
    pub eigenvalues: [f64; 7],
    /// The four inequalities as printed (the first one carries a misplaced `γ`).
    pub printed: BTreeMap<String, bool>,
    /// `λi < 0` for i = 1..4.
    pub from_eigenvalues: BTreeMap<String, bool>,
}

impl Theorem1 {
    pub fn all_printed(&self) -> bool {
        self.printed.values().all(|&b| b)
    }

    pub fn is_stable(&self) -> bool {
        self.eigenvalues.iter().all(|&l| l < 0.0)
    }
}

pub fn theorem1_conditions(p: &NondimParams) -> Theorem1 {
    let yq = p.delta / p.gamma;
    let q = p.phi / p.psi;
    let l1 = p.p1 - (p.d12 * yq + p.d10) * q / p.a1;
    let l2 = p.p2 - p.u - p.rho - (p.d22 * yq + p.d20) * q / p.a2;
    let l3 = p.p3 - p.rho;
    let l4 = p.p4 - p.d4 * p.delta / (p.gamma * p.a4);
    let l5 = -(p.d52 * yq + p.d50) * q / p.a5;
    let eigenvalues = [l1, l2, l3, l4, l5, -p.psi, -p.gamma];

    let printed = [
        (
            "phi_above_glial_threshold",
            p.phi > p.p1 * p.psi * p.a1 * p.gamma / (p.d10 + p.d12 * p.delta),
        ),
        (
            "phi_above_sensitive_threshold",
            p.phi > (p.p2 - p.u - p.rho) * p.psi * p.a2 * p.gamma / (p.d20 + p.d22 * p.delta),
        ),
        ("rho_above_p3", p.rho > p.p3),
        (
            "delta_above_endothelial_threshold",
            p.delta > p.p4 * p.gamma * p.a4 / p.d4,
        ),
    ];
    let derived = [
        ("lambda1_negative", l1 < 0.0),
        ("lambda2_negative", l2 < 0.0),
        ("lambda3_negative", l3 < 0.0),
        ("lambda4_negative", l4 < 0.0),
    ];
    Theorem1 {
        eigenvalues,
        printed: to_map(&printed),
        from_eigenvalues: to_map(&derived),
    }
}

/// Conditions for `E1`, with the two 2×2 blocks of its Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2 {
    pub conditions: BTreeMap<String, bool>,
    /// Eigenvalues of the sensitive, resistant and neuron rows.
    pub diagonal_eigenvalues: [f64; 3],
    /// Trace and determinant of the (g4, y) block.
    pub v1: f64,
    pub v2: f64,
    /// `v2` from its expanded closed form.
    pub v2_closed_form: f64,
    /// Trace and determinant of the (g1, q) block.
    pub w1: f64,
    pub w2: f64,
    pub w2_closed_form: f64,
}

/// Evaluates the conditions at a glioma-free report. Returns `None` for
/// any other kind.
pub fn theorem2_conditions(p: &NondimParams, e1: &EquilibriumReport) -> Option<Theorem2> {
    if e1.kind != EquilibriumKind::GliomaFree || !e1.exists {
        return None;
    }
    let s = e1.point;
    let (g1, g4, q, y) = (s.g1, s.g4, s.q, s.y);
    let d1 = kill_rate(KillTarget::Glial, g4, y, p);
    let d2 = kill_rate(KillTarget::Sensitive, g4, y, p);
    let d5 = kill_rate(KillTarget::Neuron, g4, y, p);
    let (a1, a4) = (p.a1, p.a4);
    let b1 = a1 + g1;
    let b4 = a4 + g4;

    let c1 = 2.0 * p.p4 * g4 * p.gamma
        + 2.0 * p.p4 * g4 * g4 * p.c4 / b4
        + p.d4 * y * a4 * p.gamma / (b4 * b4)
        > p.p4 * p.gamma + p.p4 * p.c4 * g4 / b4;
    let c2 = d2 * q > (p.p2 - p.beta2 * g1 - p.u - p.rho) * p.a2;
    let c3_printed = p.p3 < p.beta3 * g1 - p.rho;
    let c3_proof = p.p3 < p.beta3 * g1 + p.rho;
    let shared = a1 * q * (a1 * p.psi + p.c1 * g1 + g1 * p.psi) / b1.powi(3);
    let c4 = 2.0 * p.psi * p.p1 * g1
        + 2.0 * p.c1 * g1 * g1 * p.p1 / b1
        + p.d11 * g4 * shared
        + p.d12 * y * shared
        + p.d10 * shared
        > p.psi * p.p1 + p.c1 * g1 * p.p1 / b1;

    let jac = jacobian(&s, p);
    let e = |i: usize, j: usize| jac.get(i, j);
    let v1 = e(Y, Y) + e(G4, G4);
    let v2 = e(Y, Y) * e(G4, G4) - e(Y, G4) * e(G4, Y);
    let w1 = e(Q, Q) + e(G1, G1);
    let w2 = e(Q, Q) * e(G1, G1) - e(G1, Q) * e(Q, G1);

    let v2_closed_form = 2.0 * p.gamma * p.p4 * g4 - p.gamma * p.p4
        + p.gamma * p.d4 * y * a4 / (b4 * b4)
        + 2.0 * p.c4 * g4 * g4 * p.p4 / b4
        - p.c4 * g4 * p.p4 / b4;
    let w2_closed_form = 2.0 * p.psi * p.p1 * g1 + 2.0 * p.c1 * g1 * g1 * p.p1 / b1
        - p.psi * p.p1
        - p.c1 * g1 * p.p1 / b1
        + q * a1 * d1 * (a1 * p.psi + g1 * p.psi) / b1.powi(3);

    let diagonal_eigenvalues = [
        p.p2 - p.beta2 * g1 - p.u - p.rho - d2 * q / p.a2,
        p.p3 - p.beta3 * g1 - p.rho,
        -d5 * q / p.a5,
    ];
    let conditions = [
        ("endothelial_block", c1),
        ("sensitive_cleared", c2),
        ("resistant_cleared_printed", c3_printed),
        ("resistant_cleared_proof", c3_proof),
        ("glial_block", c4),
        ("v1_negative", v1 < 0.0),
        ("v2_positive", v2 > 0.0),
        ("w1_negative", w1 < 0.0),
        ("w2_positive", w2 > 0.0),
    ];
    Some(Theorem2 {
        conditions: to_map(&conditions),
        diagonal_eigenvalues,
        v1,
        v2,
        v2_closed_form,
        w1,
        w2,
        w2_closed_form,
    })
}

fn to_map(entries: &[(&str, bool)]) -> BTreeMap<String, bool> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Largest of the two infusion-dependent eigenvalues of `Df(E0)` (glial and
/// sensitive rows), read off the numerically assembled Jacobian.
fn infusion_abscissa(p: &NondimParams, phi: f64) -> f64 {
    let mut pp = *p;
    pp.phi = phi;
    let e0 = trivial_equilibrium(&pp).point;
    let jac = jacobian(&e0, &pp);
    jac.get(0, 0).max(jac.get(1, 1))
}

/// Smallest chemotherapy infusion rate in `phi_range` above which `E0` is
/// locally stable.
///
/// `None` when an infusion-independent eigenvalue is already nonnegative, or
/// when the range does not bracket the change of sign.
pub fn critical_chemo_infusion(p: &NondimParams, phi_range: (f64, f64)) -> Option<f64> {
    let (lo, hi) = phi_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return None;
    }
    let t1 = theorem1_conditions(p);
    if t1.eigenvalues[2] >= 0.0 || t1.eigenvalues[3] >= 0.0 {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    if infusion_abscissa(p, a) < 0.0 || infusion_abscissa(p, b) >= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if infusion_abscissa(p, m) >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Spectrum of the assembled `Df(E0)`, for comparison with the closed form.
pub fn trivial_spectrum(p: &NondimParams) -> crate::Result<Vec<num_complex::Complex64>> {
    let e0 = trivial_equilibrium(p).point;
    eigenvalues(&jacobian(&e0, p).to_nalgebra())
}
