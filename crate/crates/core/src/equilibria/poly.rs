//! Closed-form quadratic and cubic roots, and a companion-matrix oracle.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Larger root of `a·x² + b·x + c` when it is real and strictly positive.
///
/// Uses the cancellation-free form of the quadratic formula.
pub fn positive_quadratic_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if !(a > 0.0) || !b.is_finite() || !c.is_finite() {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let root = if b >= 0.0 {
        // -b + sq loses digits; rationalize instead. Zero when c = 0.
        if b + sq == 0.0 {
            0.0
        } else {
            -2.0 * c / (b + sq)
        }
    } else {
        (-b + sq) / (2.0 * a)
    };
    (root > 0.0).then_some(root)
}

/// Monic cubic `l1·x³ + l2·x² + l3·x + l4` with `l1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl CubicCoefficients {
    pub fn monic(l2: f64, l3: f64, l4: f64) -> Self {
        Self {
            l1: 1.0,
            l2,
            l3,
            l4,
        }
    }

    /// `A = 9·l2·l3 − 27·l4 − 2·l2³`.
    pub fn a(&self) -> f64 {
        9.0 * self.l2 * self.l3 - 27.0 * self.l4 - 2.0 * self.l2.powi(3)
    }

    /// `B = 3·l3 − l2²`.
    pub fn b(&self) -> f64 {
        3.0 * self.l3 - self.l2 * self.l2
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        ((x * self.l1 + self.l2) * x + self.l3) * x + self.l4
    }

    fn slope(&self, x: Complex64) -> Complex64 {
        (x * (3.0 * self.l1) + 2.0 * self.l2) * x + self.l3
    }

    pub fn scale(&self) -> f64 {
        1f64.max(self.l2.abs())
            .max(self.l3.abs())
            .max(self.l4.abs())
    }
}

/// All three roots of a monic cubic via the depressed cubic
/// `t³ + (B/3)·t − A/27 = 0`, `x = t − l2/3`.
///
/// Three real roots use the trigonometric form, otherwise Cardano's radicals
/// with the cancellation-free sign choice. Each root gets a few Newton
/// polishing steps that are kept only when they shrink the residual.
pub fn cardano_cubic_roots(c: &CubicCoefficients) -> [Complex64; 3] {
    debug_assert_eq!(c.l1, 1.0);
    let shift = c.l2 / 3.0;
    let p = c.b() / 3.0;
    let q = -c.a() / 27.0;
    let half_q = 0.5 * q;
    let d = half_q * half_q + (p / 3.0).powi(3);

    let depressed: [Complex64; 3] = if d < 0.0 {
        // three distinct real roots; p < 0 here
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(m * (theta - tau * k).cos(), 0.0))
    } else {
        let s = d.sqrt();
        let u = (-half_q - half_q.signum() * s).cbrt();
        let v = if u == 0.0 { 0.0 } else { -p / (3.0 * u) };
        let re = -0.5 * (u + v);
        let im = 0.5 * 3f64.sqrt() * (u - v);
        [
            Complex64::new(u + v, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    };
    depressed.map(|t| polish(c, t - shift))
}

fn polish(c: &CubicCoefficients, mut x: Complex64) -> Complex64 {
    let mut fx = c.eval(x).norm();
    for _ in 0..4 {
        let d = c.slope(x);
        if d.norm() == 0.0 || fx == 0.0 {
            break;
        }
        let mut next = x - c.eval(x) / d;
        if x.im == 0.0 {
            next.im = 0.0;
        }
        let fn_ = c.eval(next).norm();
        if fn_ < fx {
            x = next;
            fx = fn_;
        } else {
            break;
        }
    }
    x
}

/// Roots of `coeffs[0]·xⁿ + … + coeffs[n]` (degree 1 to 4) as eigenvalues of
/// the companion matrix. Independent of the closed forms above.
pub fn polynomial_root_oracle(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if !(1..=4).contains(&n) {
        return Err(Error::UnsupportedDegree(n));
    }
    let lead = coeffs[0];
    if lead == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let schur = Schur::try_new(m, 1e-16, 10_000).ok_or(Error::EigenFailure)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}
