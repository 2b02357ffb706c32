use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::State;
use crate::scalar::Scalar;

/// Integration settings. Tolerances are in double precision for every scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Final time in days.
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Output spacing in days; zero records every accepted step.
    pub stride: f64,
    /// Logistic smoothing width of the switches; zero keeps them sharp.
    pub smoothing: f64,
    /// Switch events allowed before the run is declared chattering.
    pub max_events: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 10_000.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 10.0,
            stride: 1.0,
            smoothing: 0.0,
            max_events: 1_000_000,
        }
    }
}

impl SimConfig {
    pub fn with_t_end(t_end: f64) -> Self {
        Self {
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, value: f64, reason| {
            Err(Error::InvalidParameter {
                name: name.to_string(),
                value,
                reason,
            })
        };
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end, "must be positive and finite");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol", self.rel_tol, "must be positive");
        }
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol", self.abs_tol, "must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step", self.max_step, "must be positive");
        }
        if !(self.stride >= 0.0 && self.stride.is_finite()) {
            return bad("stride", self.stride, "must be nonnegative and finite");
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return bad(
                "smoothing",
                self.smoothing,
                "must be nonnegative and finite",
            );
        }
        Ok(())
    }
}

/// Which Heaviside factor changed branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Switch {
    Chemo,
    AntiAngiogenic,
    GlialDecline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub t: f64,
    pub switch: Switch,
    /// Branch after the event.
    pub on: bool,
    /// False when the switched term vanished identically and no localization was needed.
    pub localized: bool,
}

/// Events kept in the log; the count is exact.
pub const EVENT_LOG_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Sum over accepted steps of the ∞-norm of the local error estimate.
    pub error_estimate: f64,
    pub event_count: usize,
    pub events: Vec<SwitchEvent>,
    /// Most negative stored component before clipping (zero if none).
    pub min_component: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T = f64> {
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
    pub stats: SolverStats,
}

impl<T: Scalar> Trajectory<T> {
    /// `g2 + g3` at every stored time.
    pub fn burden(&self) -> Vec<T> {
        self.states.iter().map(State::burden).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(T, State<T>)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// Component `i` of every stored state.
    pub fn component(&self, i: usize) -> Vec<T> {
        self.states.iter().map(|s| s.get(i)).collect()
    }

    /// Largest ∞-norm distance to `point` over the stored states.
    pub fn max_distance(&self, point: &State<T>) -> T {
        self.states
            .iter()
            .fold(T::zero(), |m, s| m.max(s.distance(point)))
    }

    /// CSV with header `t,g1,g2,g3,g4,g5,q,y,burden`, shortest round-trip numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 160);
        out.push_str("t,g1,g2,g3,g4,g5,q,y,burden\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t:?}");
            for v in s.to_array() {
                let _ = write!(out, ",{v:?}");
            }
            let _ = writeln!(out, ",{:?}", s.burden());
        }
        out
    }
}

impl Trajectory<f64> {
    /// JSON with the CSV columns as arrays plus solver statistics.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Columns<'a> {
            t: &'a [f64],
            g1: Vec<f64>,
            g2: Vec<f64>,
            g3: Vec<f64>,
            g4: Vec<f64>,
            g5: Vec<f64>,
            q: Vec<f64>,
            y: Vec<f64>,
            burden: Vec<f64>,
            stats: &'a SolverStats,
        }
        let c = |i| self.component(i);
        let cols = Columns {
            t: &self.times,
            g1: c(0),
            g2: c(1),
            g3: c(2),
            g4: c(3),
            g5: c(4),
            q: c(5),
            y: c(6),
            burden: self.burden(),
            stats: &self.stats,
        };
        Ok(serde_json::to_string(&cols)?)
    }
}
