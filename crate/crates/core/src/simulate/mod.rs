//! Trajectories of the model: adaptive integration, phase-portrait
//! ensembles and a solver order self-test.

mod integrator;
mod tableau;
mod trajectory;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NondimParams, State};
use crate::scalar::Scalar;

pub use integrator::{integrate, integrate_fixed, EVENT_TOL};
pub use trajectory::{SimConfig, SolverStats, Switch, SwitchEvent, Trajectory, EVENT_LOG_LIMIT};

/// `g2 + g3` along a trajectory.
pub fn burden<T: Scalar>(tr: &Trajectory<T>) -> Vec<T> {
    tr.burden()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitMember {
    pub initial: State,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Trajectories from a grid of initial states, all under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitEnsemble {
    /// Component indices of the 3-D projection.
    pub axes: [usize; 3],
    pub config: SimConfig,
    pub members: Vec<PortraitMember>,
}

impl PortraitEnsemble {
    pub fn failures(&self) -> usize {
        self.members.iter().filter(|m| m.error.is_some()).count()
    }

    /// Final states of the successful members.
    pub fn endpoints(&self) -> Vec<State> {
        self.members
            .iter()
            .filter_map(|m| m.trajectory.as_ref()?.last().map(|(_, s)| s))
            .collect()
    }

    /// Long-format CSV `member,t,<axis1>,<axis2>,<axis3>`.
    pub fn to_csv(&self) -> String {
        use crate::model::COMPONENTS;
        let mut out = format!(
            "member,t,{},{},{}\n",
            COMPONENTS[self.axes[0]], COMPONENTS[self.axes[1]], COMPONENTS[self.axes[2]]
        );
        for (k, m) in self.members.iter().enumerate() {
            let Some(tr) = &m.trajectory else { continue };
            for (t, s) in tr.times.iter().zip(&tr.states) {
                out.push_str(&format!(
                    "{k},{t:?},{:?},{:?},{:?}\n",
                    s.get(self.axes[0]),
                    s.get(self.axes[1]),
                    s.get(self.axes[2])
                ));
            }
        }
        out
    }
}

/// Integrates every grid point concurrently. Failures are kept per member.
pub fn phase_portrait(
    p: &NondimParams,
    grid: &[State],
    axes: [usize; 3],
    cfg: &SimConfig,
) -> Result<PortraitEnsemble> {
    if grid.is_empty() {
        return Err(Error::Usage("phase portrait grid is empty".into()));
    }
    if axes.iter().any(|&a| a >= 7) {
        return Err(Error::Usage(format!(
            "projection axes {axes:?} out of range"
        )));
    }
    cfg.validate()?;
    let members = grid
        .par_iter()
        .map(|s0| match integrate(s0, p, cfg) {
            Ok(tr) => PortraitMember {
                initial: *s0,
                trajectory: Some(tr),
                error: None,
            },
            Err(e) => PortraitMember {
                initial: *s0,
                trajectory: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(PortraitEnsemble {
        axes,
        config: *cfg,
        members,
    })
}

/// The eight corners `center ± offset` along `axes`, clipped at zero.
pub fn corner_grid(center: &State, axes: [usize; 3], offset: f64) -> Vec<State> {
    (0..8)
        .map(|mask| {
            let mut a = center.to_array();
            for (bit, &ax) in axes.iter().enumerate() {
                let sign = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
                a[ax] = (a[ax] + sign * offset).max(0.0);
            }
            State::from_array(a)
        })
        .collect()
}

/// Result of [`convergence_order_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// `log2(|y_h − y_{h/2}| / |y_{h/2} − y_{h/4}|)`; `None` when the
    /// differences vanish (the method is exact on the problem).
    pub order: Option<f64>,
    /// `|y_h − y_{h/2}|∞` and `|y_{h/2} − y_{h/4}|∞`.
    pub diffs: [f64; 2],
}

/// Richardson order estimate from three fixed-step runs over `[0, cfg.t_end]`
/// with `cfg.t_end / cfg.max_step` (rounded up) steps and its doublings.
/// Switches stay at their initial branches.
pub fn convergence_order_check(s0: &State, p: &NondimParams, cfg: &SimConfig) -> OrderEstimate {
    let n = (cfg.t_end / cfg.max_step).ceil().max(1.0) as usize;
    let y1 = integrate_fixed(s0, p, cfg.t_end, n);
    let y2 = integrate_fixed(s0, p, cfg.t_end, 2 * n);
    let y4 = integrate_fixed(s0, p, cfg.t_end, 4 * n);
    let d1 = y1.distance(&y2);
    let d2 = y2.distance(&y4);
    let order = (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).log2());
    OrderEstimate {
        order,
        diffs: [d1, d2],
    }
}
