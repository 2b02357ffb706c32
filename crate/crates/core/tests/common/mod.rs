//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use glioma_core::model::{glial_rate, Switching};
use glioma_core::stability::{finite_difference_jacobian, jacobian};
use glioma_core::{NondimParams, State};
use num_complex::Complex64;

/// Central-difference step for Jacobian checks.
pub const FD_STEP: f64 = 1e-5;

/// Sampled states keep `q`, `y` and `|ġ1|` this far from their switching surfaces.
pub const SURFACE_GAP: f64 = 1e-3;

/// Whether the `FD_STEP` stencil around `s` stays on one side of every switch.
pub fn clear_of_surfaces(s: &State, p: &NondimParams) -> bool {
    s.q > SURFACE_GAP && s.y > SURFACE_GAP && glial_rate(s, p).abs() > SURFACE_GAP
}

/// `max |J − J_fd| / max |J|` at `s`, with sharp switches.
pub fn jacobian_fd_error(s: &State, p: &NondimParams) -> f64 {
    let j = jacobian(s, p);
    let fd = finite_difference_jacobian(s, p, Switching::Sharp, FD_STEP);
    let mut diff = 0.0f64;
    for (r, row) in fd.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            diff = diff.max((j.get(r, c) - v).abs());
        }
    }
    diff / j.max_abs()
}

/// Largest distance after greedily pairing each of `got` with its nearest
/// unused member of `want`, divided by the largest `|want|`.
pub fn root_mismatch(got: &[Complex64], want: &[Complex64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut used = vec![false; want.len()];
    let mut worst = 0.0f64;
    for z in got {
        let (k, d) = want
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst / scale
}

pub fn presets() -> [NondimParams; 2] {
    [NondimParams::glioma_free(), NondimParams::resistant()]
}
