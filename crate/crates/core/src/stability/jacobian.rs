//! Analytic Jacobian of the model right-hand side.
//!
//! Heaviside factors are treated as locally constant (zero derivative) with
//! sharp or frozen switching, and differentiated exactly when smoothed. The
//! neuron equation is differentiated through ġ1 by the chain rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    glial_rate, holling, kill_coefficients, kill_rate, switch_slope, KillTarget, NondimParams,
    State, Switching, COMPONENTS, G1, G2, G3, G4, G5, Q, Y,
};
use crate::scalar::Scalar;

/// A Heaviside switching surface the state sits exactly on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchSurface {
    /// `q = 0` with mutation active (`u·g2 ≠ 0`).
    Chemo,
    /// `y = 0` with dormancy active (`ρ·(g2+g3) ≠ 0`).
    AntiAngiogenic,
    /// `ġ1 = 0` with neuron coupling active (`α·g5 ≠ 0`).
    GlialDecline,
}

/// 7×7 Jacobian, rows and columns ordered `(g1, g2, g3, g4, g5, q, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianMatrix<T = f64> {
    pub entries: [[T; 7]; 7],
    /// Switching surfaces at the evaluation point where one-sided derivatives
    /// differ. Entries use the branch selected by `F(0) = 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_smooth: Vec<SwitchSurface>,
}

impl<T: Scalar> JacobianMatrix<T> {
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row][col]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Errors if the point lies on a switching surface.
    pub fn ensure_smooth(&self) -> Result<()> {
        if self.non_smooth.is_empty() {
            Ok(())
        } else {
            Err(Error::NonSmoothPoint(format!("{:?}", self.non_smooth)))
        }
    }

    /// Row-major CSV with a header row of component names.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,");
        out.push_str(&COMPONENTS.join(","));
        out.push('\n');
        for (name, row) in COMPONENTS.iter().zip(&self.entries) {
            out.push_str(name);
            for v in row {
                out.push(',');
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        out
    }
}

impl JacobianMatrix<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::SMatrix<f64, 7, 7> {
        nalgebra::SMatrix::from_fn(|i, j| self.entries[i][j])
    }
}

/// Jacobian with sharp switches.
pub fn jacobian<T: Scalar>(s: &State<T>, p: &NondimParams<T>) -> JacobianMatrix<T> {
    jacobian_with(s, p, Switching::Sharp)
}

pub fn jacobian_with<T: Scalar>(
    s: &State<T>,
    p: &NondimParams<T>,
    sw: Switching<T>,
) -> JacobianMatrix<T> {
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    let State {
        g1,
        g2,
        g3,
        g4,
        g5,
        q,
        y,
    } = *s;

    let mut j = [[zero; 7]; 7];

    let (_, d11, d12) = kill_coefficients(KillTarget::Glial, p);
    let (_, d21, d22) = kill_coefficients(KillTarget::Sensitive, p);
    let (_, d51, d52) = kill_coefficients(KillTarget::Neuron, p);
    let d1 = kill_rate(KillTarget::Glial, g4, y, p);
    let d2 = kill_rate(KillTarget::Sensitive, g4, y, p);
    let d5 = kill_rate(KillTarget::Neuron, g4, y, p);

    let h1 = holling(g1, p.a1);
    let h2 = holling(g2, p.a2);
    let h4 = holling(g4, p.a4);
    let h5 = holling(g5, p.a5);
    // derivatives of x/(a+x)
    let h1p = p.a1 / ((p.a1 + g1) * (p.a1 + g1));
    let h2p = p.a2 / ((p.a2 + g2) * (p.a2 + g2));
    let h4p = p.a4 / ((p.a4 + g4) * (p.a4 + g4));
    let h5p = p.a5 / ((p.a5 + g5) * (p.a5 + g5));

    let glioma = g2 + g3;
    let cap = one + p.tau * g4;
    let room = one - glioma / cap;
    let cap_slope = glioma * p.tau / (cap * cap);

    // switch factors and their slopes, evaluated as in rhs_with
    let dg1 = glial_rate(s, p);
    let (f_q, f_y, f_decline) = switch_values(s, dg1, sw);
    let (fq_slope, fy_slope, fdecline_slope) = (
        switch_slope(sw, q),
        switch_slope(sw, y),
        switch_slope(sw, -dg1),
    );

    // ġ1
    j[G1][G1] = p.p1 * (one - two * g1) - p.beta1 * glioma - d1 * q * h1p;
    j[G1][G2] = -p.beta1 * g1;
    j[G1][G3] = -p.beta1 * g1;
    j[G1][G4] = -d11 * q * h1;
    j[G1][Q] = -d1 * h1;
    j[G1][Y] = -d12 * q * h1;

    // ġ2
    j[G2][G1] = -p.beta2 * g2;
    j[G2][G2] =
        p.p2 * room - p.p2 * g2 / cap - p.beta2 * g1 - p.u * f_q - p.rho * f_y - d2 * q * h2p;
    j[G2][G3] = -p.p2 * g2 / cap;
    j[G2][G4] = p.p2 * g2 * cap_slope - d21 * q * h2;
    j[G2][Q] = -p.u * fq_slope * g2 - d2 * h2;
    j[G2][Y] = -p.rho * fy_slope * g2 - d22 * q * h2;

    // ġ3
    j[G3][G1] = -p.beta3 * g3;
    j[G3][G2] = -p.p3 * g3 / cap + p.u * f_q;
    j[G3][G3] = p.p3 * room - p.p3 * g3 / cap - p.beta3 * g1 - p.rho * f_y;
    j[G3][G4] = p.p3 * g3 * cap_slope;
    j[G3][Q] = p.u * fq_slope * g2;
    j[G3][Y] = -p.rho * fy_slope * g3;

    // ġ4
    j[G4][G2] = p.mu;
    j[G4][G3] = p.mu;
    j[G4][G4] = p.p4 * (one - two * g4) - p.d4 * y * h4p;
    j[G4][Y] = -p.d4 * h4;

    // ġ5 = α·G·g5 − d5·q·h5 with G = ġ1·F(−ġ1); dG = (F − ġ1·F′)·dġ1
    let coupling = p.alpha * g5 * (f_decline - dg1 * fdecline_slope);
    for col in 0..7 {
        j[G5][col] = coupling * j[G1][col];
    }
    j[G5][G4] = j[G5][G4] - d51 * q * h5;
    j[G5][G5] = p.alpha * dg1 * f_decline - d5 * q * h5p;
    j[G5][Q] = j[G5][Q] - d5 * h5;
    j[G5][Y] = j[G5][Y] - d52 * q * h5;

    // q̇
    j[Q][G1] = -p.c1 * h1p * q;
    j[Q][G2] = -p.c2 * h2p * q;
    j[Q][G5] = -p.c5 * h5p * q;
    j[Q][Q] = -(p.psi + p.c1 * h1 + p.c2 * h2 + p.c5 * h5);

    // ẏ
    j[Y][G4] = -p.c4 * h4p * y;
    j[Y][Y] = -(p.gamma + p.c4 * h4);

    let mut non_smooth = Vec::new();
    if matches!(sw, Switching::Sharp) {
        if q == zero && p.u * g2 != zero {
            non_smooth.push(SwitchSurface::Chemo);
        }
        if y == zero && p.rho * glioma != zero {
            non_smooth.push(SwitchSurface::AntiAngiogenic);
        }
        if dg1 == zero && p.alpha * g5 != zero {
            non_smooth.push(SwitchSurface::GlialDecline);
        }
    }

    JacobianMatrix {
        entries: j,
        non_smooth,
    }
}

fn switch_values<T: Scalar>(s: &State<T>, dg1: T, sw: Switching<T>) -> (T, T, T) {
    use crate::model::{heaviside, smooth_heaviside};
    let flag = |b: bool| if b { T::one() } else { T::zero() };
    match sw {
        Switching::Sharp => (heaviside(s.q), heaviside(s.y), heaviside(-dg1)),
        Switching::Smooth(eps) => (
            smooth_heaviside(s.q, eps),
            smooth_heaviside(s.y, eps),
            smooth_heaviside(-dg1, eps),
        ),
        Switching::Frozen(m) => (
            flag(m.chemo),
            flag(m.anti_angiogenic),
            flag(m.glial_decline),
        ),
    }
}

/// Central-difference Jacobian of `rhs_with`. Test oracle for the analytic form.
pub fn finite_difference_jacobian(
    s: &State,
    p: &NondimParams,
    sw: Switching,
    step: f64,
) -> [[f64; 7]; 7] {
    let base = s.to_array();
    let mut out = [[0.0; 7]; 7];
    for col in 0..7 {
        let mut plus = base;
        let mut minus = base;
        plus[col] += step;
        minus[col] -= step;
        let fp = crate::model::rhs_with(&State::from_array(plus), p, sw).to_array();
        let fm = crate::model::rhs_with(&State::from_array(minus), p, sw).to_array();
        for row in 0..7 {
            out[row][col] = (fp[row] - fm[row]) / (2.0 * step);
        }
    }
    out
}
