//! Spectra of 7×7 real matrices and their stability classification.

use nalgebra::{SMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real parts within this band of zero count as marginal.
pub const MARGINAL_EPS: f64 = 1e-12;
/// Imaginary parts above this count as oscillatory.
pub const SPIRAL_EPS: f64 = 1e-9;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    StableNode,
    StableSpiral,
    Saddle,
    Unstable,
    Marginal,
}

/// Coarse stability verdict; a saddle is unstable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Classification {
    pub fn verdict(self) -> Verdict {
        match self {
            Classification::StableNode | Classification::StableSpiral => Verdict::Stable,
            Classification::Saddle | Classification::Unstable => Verdict::Unstable,
            Classification::Marginal => Verdict::Marginal,
        }
    }

    pub fn is_stable(self) -> bool {
        self.verdict() == Verdict::Stable
    }
}

/// Eigenvalues of a real 7×7 matrix, sorted by real part then imaginary part.
///
/// Complex eigenvalues come out as exact conjugate pairs.
pub fn eigenvalues(m: &SMatrix<f64, 7, 7>) -> Result<Vec<Complex64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let schur = Schur::try_new(*m, SCHUR_EPS, SCHUR_MAX_ITER).ok_or(Error::EigenFailure)?;
    let raw: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    if raw.len() != 7 || raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let mut out = symmetrize(raw);
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Pairs each eigenvalue having positive imaginary part with its nearest
/// partner below the axis and replaces both by an exact conjugate pair.
fn symmetrize(mut raw: Vec<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(raw.len());
    raw.sort_by(|a, b| b.im.total_cmp(&a.im));
    while let Some(z) = raw.first().copied() {
        raw.remove(0);
        if z.im.abs() <= f64::EPSILON * z.re.abs().max(1.0) {
            out.push(Complex64::new(z.re, 0.0));
            continue;
        }
        if z.im < 0.0 {
            // unmatched lower-half value: the Schur form never produces one,
            // but keep it rather than drop a root.
            out.push(z);
            continue;
        }
        let partner = raw
            .iter()
            .enumerate()
            .filter(|(_, w)| w.im < 0.0)
            .min_by(|(_, a), (_, b)| (*a - z.conj()).norm().total_cmp(&(*b - z.conj()).norm()))
            .map(|(i, _)| i);
        match partner {
            Some(i) => {
                let w = raw.remove(i);
                let re = 0.5 * (z.re + w.re);
                let im = 0.5 * (z.im - w.im);
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            }
            None => out.push(z),
        }
    }
    out
}

pub fn classify(eigs: &[Complex64]) -> Classification {
    let neg = eigs.iter().filter(|z| z.re < -MARGINAL_EPS).count();
    let pos = eigs.iter().filter(|z| z.re > MARGINAL_EPS).count();
    if neg == eigs.len() {
        if eigs.iter().any(|z| z.im.abs() > SPIRAL_EPS) {
            Classification::StableSpiral
        } else {
            Classification::StableNode
        }
    } else if pos > 0 && neg > 0 {
        Classification::Saddle
    } else if pos > 0 {
        Classification::Unstable
    } else {
        Classification::Marginal
    }
}

/// Largest real part of a spectrum.
pub fn spectral_abscissa(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}
