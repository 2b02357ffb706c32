//! Oracles and trajectory feature extraction for the acceptance checks.
//!
//! Test-only crate: it sits downstream of `glioma-core` so the acceptance
//! target runs after the core suites.

use glioma_core::model::{glial_rate, Switching};
use glioma_core::stability::{finite_difference_jacobian, jacobian};
use glioma_core::{NondimParams, State};
use num_complex::Complex64;

/// Central-difference step for Jacobian checks.
pub const FD_STEP: f64 = 1e-5;

/// Minimum distance of `q`, `y` and `|ġ1|` from their switching surfaces for
/// a finite-difference stencil to stay on one branch.
pub const SURFACE_GAP: f64 = 1e-3;

pub fn clear_of_surfaces(s: &State, p: &NondimParams) -> bool {
    s.q > SURFACE_GAP && s.y > SURFACE_GAP && glial_rate(s, p).abs() > SURFACE_GAP
}

/// `max |J − J_fd| / max |J|` with sharp switches.
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

/// Greedy nearest pairing of `got` against `want`; the largest pair distance
/// divided by the largest `|want|`.
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
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst / scale
}

/// Sorted real values match within `tol` pairwise.
pub fn multiset_within(got: &[f64], want: &[f64], tol: f64) -> bool {
    let mut g = got.to_vec();
    let mut w = want.to_vec();
    g.sort_by(f64::total_cmp);
    w.sort_by(f64::total_cmp);
    g.len() == w.len() && g.iter().zip(&w).all(|(a, b)| (a - b).abs() <= tol)
}

/// `(t, value)` of the first maximum of a series.
pub fn peak(times: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (times[0], values[0]);
    for (&t, &v) in times.iter().zip(values) {
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Earliest sample time after which every value stays within `target ± tol`;
/// `None` if the last value is outside the band.
pub fn settle_time(times: &[f64], values: &[f64], target: f64, tol: f64) -> Option<f64> {
    let mut settled = None;
    for (&t, &v) in times.iter().zip(values).rev() {
        if (v - target).abs() > tol {
            break;
        }
        settled = Some(t);
    }
    settled
}

/// Earliest sample time after which every value is below `bound`.
pub fn stays_below_from(times: &[f64], values: &[f64], bound: f64) -> Option<f64> {
    let mut from = None;
    for (&t, &v) in times.iter().zip(values).rev() {
        if v >= bound {
            break;
        }
        from = Some(t);
    }
    from
}
