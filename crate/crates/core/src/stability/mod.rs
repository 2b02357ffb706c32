//! Linearization, spectra and local stability.

mod eigen;
mod jacobian;
mod theorems;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{EquilibriumKind, EquilibriumReport};
use crate::error::Result;
use crate::model::{NondimParams, State};

pub use eigen::{
    classify, eigenvalues, spectral_abscissa, Classification, Verdict, MARGINAL_EPS, SPIRAL_EPS,
};
pub use jacobian::{
    finite_difference_jacobian, jacobian, jacobian_with, JacobianMatrix, SwitchSurface,
};
pub use theorems::{
    critical_chemo_infusion, theorem1_conditions, theorem2_conditions, trivial_spectrum, Theorem1,
    Theorem2,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Sorted by real part.
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub verdict: Verdict,
    pub theorem_flags: BTreeMap<String, bool>,
    pub matrix: JacobianMatrix,
}

impl StabilityReport {
    pub fn spectral_abscissa(&self) -> f64 {
        spectral_abscissa(&self.eigenvalues)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Linearizes at `s` and classifies. Points on a switching surface are
/// analyzed with the `F(0) = 0` branch and listed in `matrix.non_smooth`.
pub fn analyze(s: &State, p: &NondimParams) -> Result<StabilityReport> {
    let matrix = jacobian(s, p);
    let eigenvalues = eigenvalues(&matrix.to_nalgebra())?;
    let classification = classify(&eigenvalues);
    Ok(StabilityReport {
        eigenvalues,
        classification,
        verdict: classification.verdict(),
        theorem_flags: BTreeMap::new(),
        matrix,
    })
}

/// [`analyze`] at an equilibrium, with the matching theorem conditions
/// merged into `theorem_flags`.
pub fn analyze_equilibrium(e: &EquilibriumReport, p: &NondimParams) -> Result<StabilityReport> {
    let mut report = analyze(&e.point, p)?;
    match e.kind {
        EquilibriumKind::Trivial => {
            let t1 = theorem1_conditions(p);
            report.theorem_flags.extend(t1.printed);
            report.theorem_flags.extend(t1.from_eigenvalues);
        }
        EquilibriumKind::GliomaFree => {
            if let Some(t2) = theorem2_conditions(p, e) {
                report.theorem_flags.extend(t2.conditions);
            }
        }
        EquilibriumKind::Resistant => {}
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{glioma_free_equilibrium, resistant_equilibrium, trivial_equilibrium};

    fn multiset_close(got: &[f64], want: &[f64], tol: f64) -> bool {
        let mut g = got.to_vec();
        let mut w = want.to_vec();
        g.sort_by(f64::total_cmp);
        w.sort_by(f64::total_cmp);
        g.len() == w.len() && g.iter().zip(&w).all(|(a, b)| (a - b).abs() <= tol)
    }

    #[test]
    fn glioma_free_equilibrium_is_a_stable_node() {
        let p = NondimParams::glioma_free();
        let e1 = glioma_free_equilibrium(&p).unwrap();
        let r = analyze_equilibrium(&e1, &p).unwrap();
        let re: Vec<f64> = r.eigenvalues.iter().map(|z| z.re).collect();
        let printed = [-0.001, -0.149, -0.001, -0.009, -0.022, -0.018, -0.007];
        assert!(multiset_close(&re, &printed, 2e-3), "{re:?}");
        assert_eq!(r.classification, Classification::StableNode);
        assert!(r.theorem_flags["sensitive_cleared"]);
    }

    #[test]
    fn glioma_free_jacobian_matches_printed_entries() {
        let p = NondimParams::glioma_free();
        let e1 = glioma_free_equilibrium(&p).unwrap();
        let j = jacobian(&e1.point, &p);
        assert!((j.get(0, 0) + 0.006).abs() < 1e-3);
        assert!((j.get(6, 6) + 0.148).abs() < 1e-3);
        // neuron row reduces to its diagonal since ġ1 = 0
        for col in 0..7 {
            if col != 4 {
                assert_eq!(j.get(4, col), 0.0);
            }
        }
    }

    #[test]
    fn resistant_spectrum_real_parts() {
        let p = NondimParams::resistant();
        let e2 = resistant_equilibrium(&p).unwrap();
        let r = analyze_equilibrium(&e2, &p).unwrap();
        let re: Vec<f64> = r.eigenvalues.iter().map(|z| z.re).collect();
        let printed = [
            -0.03996, -0.0181, -0.1554, -0.0025, -0.0048, -0.0024, -0.0046,
        ];
        assert!(multiset_close(&re, &printed, 1e-3), "{re:?}");
        assert_eq!(r.verdict, Verdict::Stable);
    }

    #[test]
    fn trivial_equilibrium_is_unstable() {
        let p = NondimParams::glioma_free();
        let e0 = trivial_equilibrium(&p);
        let r = analyze_equilibrium(&e0, &p).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        // the glial direction dominates; the endothelial one is positive too
        let t1 = theorem1_conditions(&p);
        assert!((r.spectral_abscissa() - t1.eigenvalues[0]).abs() < 1e-12);
        assert!(t1.eigenvalues[3] > 0.0);
        assert!(!r.theorem_flags["lambda4_negative"]);
    }
}
