//! Adaptive Dormand–Prince integration with the Heaviside switches frozen
//! between localized crossings.

use super::tableau::{A, E, P};
use super::trajectory::{SimConfig, SolverStats, Switch, SwitchEvent, Trajectory, EVENT_LOG_LIMIT};
use crate::error::{Error, Result};
use crate::model::{glial_rate, rhs_with, NondimParams, State, SwitchModes, Switching};
use crate::scalar::Scalar;
use crate::stability::jacobian_with;

type Vec7<T> = [T; 7];

/// Event localization width in days.
pub const EVENT_TOL: f64 = 1e-9;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_NONFINITE_RETRIES: usize = 60;

struct System<'a, T: Scalar> {
    p: &'a NondimParams<T>,
    smooth: Option<T>,
    evals: usize,
}

impl<'a, T: Scalar> System<'a, T> {
    fn switching(&self, modes: SwitchModes) -> Switching<T> {
        match self.smooth {
            Some(eps) => Switching::Smooth(eps),
            None => Switching::Frozen(modes),
        }
    }

    fn eval(&mut self, y: &Vec7<T>, modes: SwitchModes) -> Vec7<T> {
        self.evals += 1;
        rhs_with(&State::from_array(*y), self.p, self.switching(modes)).to_array()
    }
}

struct Step<T> {
    y: Vec7<T>,
    k: [Vec7<T>; 7],
    /// ∞-norm of the local error weighted by the tolerance scale.
    err: f64,
    /// Unweighted ∞-norm of the local error.
    err_abs: f64,
}

fn dp_step<T: Scalar>(
    sys: &mut System<'_, T>,
    y0: &Vec7<T>,
    k1: &Vec7<T>,
    h: T,
    modes: SwitchModes,
    rtol: f64,
    atol: f64,
) -> Step<T> {
    let mut k = [[T::zero(); 7]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y0;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                let a = T::lit(a) * h;
                for i in 0..7 {
                    ys[i] = ys[i] + a * kj[i];
                }
            }
        }
        k[s] = sys.eval(&ys, modes);
        if s == 6 {
            // stage 7 sits at the new solution
            let mut err = 0.0f64;
            let mut err_abs = 0.0f64;
            for i in 0..7 {
                let mut e = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    e = e + T::lit(E[j]) * kj[i];
                }
                let e = (e * h).to_f64_lossy().abs();
                let scale = atol + rtol * y0[i].abs().max(ys[i].abs()).to_f64_lossy();
                err = err.max(e / scale);
                err_abs = err_abs.max(e);
                if !e.is_finite() {
                    err = f64::NAN;
                }
            }
            return Step {
                y: ys,
                k,
                err,
                err_abs,
            };
        }
    }
    unreachable!()
}

fn dense<T: Scalar>(y0: &Vec7<T>, k: &[Vec7<T>; 7], h: T, theta: T) -> Vec7<T> {
    let powers = [
        theta,
        theta * theta,
        theta * theta * theta,
        theta * theta * theta * theta,
    ];
    let mut w = [T::zero(); 7];
    for (wi, row) in w.iter_mut().zip(P.iter()) {
        *wi = row
            .iter()
            .zip(&powers)
            .fold(T::zero(), |acc, (c, t)| acc + T::lit(*c) * *t);
    }
    let mut out = *y0;
    for (kj, wj) in k.iter().zip(&w) {
        if *wj != T::zero() {
            for i in 0..7 {
                out[i] = out[i] + h * *wj * kj[i];
            }
        }
    }
    out
}

fn switch_values<T: Scalar>(y: &Vec7<T>, p: &NondimParams<T>) -> [T; 3] {
    let s = State::from_array(*y);
    [s.q, s.y, -glial_rate(&s, p)]
}

fn mode_of(m: &SwitchModes, i: usize) -> bool {
    match i {
        0 => m.chemo,
        1 => m.anti_angiogenic,
        _ => m.glial_decline,
    }
}

fn set_mode(m: &mut SwitchModes, i: usize, v: bool) {
    match i {
        0 => m.chemo = v,
        1 => m.anti_angiogenic = v,
        _ => m.glial_decline = v,
    }
}

const SWITCHES: [Switch; 3] = [Switch::Chemo, Switch::AntiAngiogenic, Switch::GlialDecline];

/// A switch whose term vanishes identically on the current state cannot
/// change the vector field, so its crossings need no localization.
fn is_inert<T: Scalar>(i: usize, y: &Vec7<T>, p: &NondimParams<T>) -> bool {
    let s = State::from_array(*y);
    let zero = T::zero();
    match i {
        0 => p.u * s.g2 == zero,
        1 => p.rho * (s.g2 + s.g3) == zero,
        _ => p.alpha * s.g5 == zero,
    }
}

/// Branch of each switch at a state; on a surface the direction of motion decides.
fn modes_at<T: Scalar>(y: &Vec7<T>, p: &NondimParams<T>) -> SwitchModes {
    let s = State::from_array(*y);
    let g = switch_values(y, p);
    let zero = T::zero();
    let mut m = SwitchModes {
        chemo: g[0] > zero,
        anti_angiogenic: g[1] > zero,
        glial_decline: g[2] > zero,
    };
    if g[0] == zero || g[1] == zero {
        let f = rhs_with(&s, p, Switching::Frozen(m));
        if g[0] == zero {
            m.chemo = f.q > zero;
        }
        if g[1] == zero {
            m.anti_angiogenic = f.y > zero;
        }
    }
    if g[2] == zero {
        // d(-ġ1)/dt = -(∇ġ1 · f); ġ1 does not depend on the switches
        let f = rhs_with(&s, p, Switching::Frozen(m)).to_array();
        let row = jacobian_with(&s, p, Switching::Frozen(m)).entries[0];
        let g1_dd = row.iter().zip(&f).fold(zero, |acc, (a, b)| acc + *a * *b);
        m.glial_decline = -g1_dd > zero;
    }
    m
}

/// Integrates from `s0` at `t = 0` to `cfg.t_end`.
///
/// With sharp switches the three Heaviside factors are held fixed within a
/// step; a step that ends on the other side of a surface is cut back to the
/// crossing (located on the dense output to [`EVENT_TOL`]) and integration
/// restarts there with the new branch.
pub fn integrate<T: Scalar>(
    s0: &State<T>,
    p: &NondimParams<T>,
    cfg: &SimConfig,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    s0.validate()?;
    let smooth = (cfg.smoothing > 0.0).then(|| T::lit(cfg.smoothing));
    let mut sys = System {
        p,
        smooth,
        evals: 0,
    };
    let (rtol, atol) = (cfg.rel_tol, cfg.abs_tol);
    let t_end = cfg.t_end;

    let mut stats = SolverStats {
        rel_tol: rtol,
        abs_tol: atol,
        ..Default::default()
    };
    let mut rec = Recorder::new(cfg, *s0);

    let mut t = 0.0f64;
    let mut y = s0.to_array();
    let mut modes = modes_at(&y, p);
    let mut k1 = sys.eval(&y, modes);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let mut h = initial_step(&mut sys, &y, &k1, modes, rtol, atol).min(cfg.max_step);
    let mut nonfinite = 0usize;
    let mut last_rejected = false;

    while t < t_end {
        let remaining = t_end - t;
        let mut h_try = h.min(cfg.max_step);
        if h_try >= remaining || remaining - h_try < 1e-12 * t_end {
            h_try = remaining;
        }
        if h_try <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let hs = T::lit(h_try);
        let step = dp_step(&mut sys, &y, &k1, hs, modes, rtol, atol);
        if !step.err.is_finite() || step.y.iter().any(|v| !v.is_finite()) {
            nonfinite += 1;
            if nonfinite > MAX_NONFINITE_RETRIES {
                return Err(Error::NonFinite { t });
            }
            stats.rejected += 1;
            h = h_try * 0.25;
            last_rejected = true;
            continue;
        }
        nonfinite = 0;
        if step.err > 1.0 {
            stats.rejected += 1;
            let factor = (SAFETY * step.err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            h = h_try * factor;
            last_rejected = true;
            continue;
        }

        // switch crossings inside the step
        let mut crossing: Option<(f64, usize)> = None;
        let mut inert_flips = Vec::new();
        if smooth.is_none() {
            let g_end = switch_values(&step.y, p);
            for i in 0..3 {
                if mode_of(&modes, i) == (g_end[i] > T::zero()) {
                    continue;
                }
                if is_inert(i, &y, p) && is_inert(i, &step.y, p) {
                    inert_flips.push(i);
                    continue;
                }
                let tc = locate(&y, &step.k, hs, h_try, i, mode_of(&modes, i), p);
                if crossing.is_none_or(|(tb, _)| tc < tb) {
                    crossing = Some((tc, i));
                }
            }
        }

        let (t_new, taken, h_used, far_side) = match crossing {
            None => (t + h_try, step, h_try, None),
            Some((dt, i)) => {
                let hb = dt.max(EVENT_TOL.min(h_try));
                // branches beyond the crossing, read from the dense output of the full step
                let probe = dense(&y, &step.k, hs, T::lit((dt / h_try).min(1.0)));
                let mut next = modes_at(&probe, p);
                set_mode(&mut next, i, !mode_of(&modes, i));
                let redo = dp_step(&mut sys, &y, &k1, T::lit(hb), modes, rtol, atol);
                (t + hb, redo, hb, Some(next))
            }
        };

        stats.accepted += 1;
        stats.error_estimate += taken.err_abs;
        rec.record_step(t, &y, &taken.k, h_used, t_new, &taken.y);

        let old_modes = modes;
        if let Some(next) = far_side {
            modes = next;
        } else {
            for &i in &inert_flips {
                set_mode(&mut modes, i, !mode_of(&old_modes, i));
            }
        }
        for (i, sw) in SWITCHES.iter().enumerate() {
            if mode_of(&old_modes, i) != mode_of(&modes, i) {
                stats.event_count += 1;
                if stats.events.len() < EVENT_LOG_LIMIT {
                    stats.events.push(SwitchEvent {
                        t: t_new,
                        switch: *sw,
                        on: mode_of(&modes, i),
                        localized: !inert_flips.contains(&i),
                    });
                }
            }
        }
        if stats.event_count > cfg.max_events {
            return Err(Error::Chattering {
                count: stats.event_count,
                t: t_new,
            });
        }

        t = t_new;
        y = taken.y;
        k1 = if modes == old_modes {
            taken.k[6]
        } else {
            sys.eval(&y, modes)
        };

        if crossing.is_none() {
            let mut factor = if step_err_zero(taken.err) {
                MAX_FACTOR
            } else {
                (SAFETY * taken.err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = h_try * factor;
        }
        last_rejected = false;
    }

    stats.rhs_evaluations = sys.evals;
    let (times, states, min_component) = rec.finish(t_end, &y);
    stats.min_component = min_component;
    Ok(Trajectory {
        times,
        states,
        stats,
    })
}

fn step_err_zero(err: f64) -> bool {
    err <= 1e-300
}

/// Earliest time offset in `(0, h]` where switch `i` leaves branch `on`.
fn locate<T: Scalar>(
    y0: &Vec7<T>,
    k: &[Vec7<T>; 7],
    hs: T,
    h: f64,
    i: usize,
    on: bool,
    p: &NondimParams<T>,
) -> f64 {
    let flipped = |dt: f64| {
        let y = dense(y0, k, hs, T::lit(dt / h));
        (switch_values(&y, p)[i] > T::zero()) != on
    };
    let (mut a, mut b) = (0.0f64, h);
    while b - a > EVENT_TOL {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if flipped(m) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

fn initial_step<T: Scalar>(
    sys: &mut System<'_, T>,
    y0: &Vec7<T>,
    f0: &Vec7<T>,
    modes: SwitchModes,
    rtol: f64,
    atol: f64,
) -> f64 {
    let scale: Vec<f64> = y0
        .iter()
        .map(|v| atol + rtol * v.to_f64_lossy().abs())
        .collect();
    let norm = |v: &Vec7<T>| {
        v.iter()
            .zip(&scale)
            .map(|(x, s)| (x.to_f64_lossy() / s).powi(2))
            .sum::<f64>()
            .sqrt()
            / 7f64.sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut y1 = *y0;
    for i in 0..7 {
        y1[i] = y1[i] + T::lit(h0) * f0[i];
    }
    let f1 = sys.eval(&y1, modes);
    let mut diff = [T::zero(); 7];
    for i in 0..7 {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Collects output states on the stride grid.
struct Recorder<T: Scalar> {
    stride: f64,
    next_index: usize,
    times: Vec<T>,
    states: Vec<State<T>>,
    min_component: f64,
}

impl<T: Scalar> Recorder<T> {
    fn new(cfg: &SimConfig, s0: State<T>) -> Self {
        Self {
            stride: cfg.stride,
            next_index: 1,
            times: vec![T::zero()],
            states: vec![s0],
            min_component: 0.0,
        }
    }

    fn push(&mut self, t: f64, y: &Vec7<T>) {
        let mut s = *y;
        for v in s.iter_mut() {
            let x = v.to_f64_lossy();
            if x < 0.0 {
                self.min_component = self.min_component.min(x);
                *v = T::zero();
            }
        }
        self.times.push(T::lit(t));
        self.states.push(State::from_array(s));
    }

    fn record_step(
        &mut self,
        t0: f64,
        y0: &Vec7<T>,
        k: &[Vec7<T>; 7],
        h: f64,
        t1: f64,
        y1: &Vec7<T>,
    ) {
        if self.stride == 0.0 {
            self.push(t1, y1);
            return;
        }
        loop {
            let tg = self.stride * self.next_index as f64;
            if tg > t1 {
                break;
            }
            let y = if tg == t1 {
                *y1
            } else {
                dense(y0, k, T::lit(h), T::lit((tg - t0) / h))
            };
            self.push(tg, &y);
            self.next_index += 1;
        }
    }

    fn finish(mut self, t_end: f64, y: &Vec7<T>) -> (Vec<T>, Vec<State<T>>, f64) {
        let last = self.times.last().map(|v| v.to_f64_lossy()).unwrap_or(0.0);
        if last < t_end {
            self.push(t_end, y);
        }
        (self.times, self.states, self.min_component)
    }
}

/// Fixed-step Dormand–Prince with the switches frozen at their initial
/// branches. Used for order verification.
pub fn integrate_fixed<T: Scalar>(
    s0: &State<T>,
    p: &NondimParams<T>,
    t_end: f64,
    steps: usize,
) -> State<T> {
    let mut sys = System {
        p,
        smooth: None,
        evals: 0,
    };
    let modes = modes_at(&s0.to_array(), p);
    let h = T::lit(t_end / steps as f64);
    let mut y = s0.to_array();
    let mut k1 = sys.eval(&y, modes);
    for _ in 0..steps {
        let step = dp_step(&mut sys, &y, &k1, h, modes, 1.0, 1.0);
        y = step.y;
        k1 = step.k[6];
    }
    State::from_array(y)
}
