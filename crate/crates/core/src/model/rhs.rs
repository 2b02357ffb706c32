//! Right-hand side of the dimensionless seven-compartment system.

use serde::{Deserialize, Serialize};

use super::params::NondimParams;
use super::state::{Derivative, State};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unit step with the boundary in the zero branch: `F(0) = 0`.
#[inline]
pub fn heaviside<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// Logistic approximation `1 / (1 + exp(-x/eps))` of [`heaviside`].
#[inline]
pub fn smooth_heaviside<T: Scalar>(x: T, eps: T) -> T {
    let z = -x / eps;
    // exp overflows to inf for large z, which still yields 0.
    T::one() / (T::one() + z.exp())
}

#[inline]
pub(crate) fn smooth_heaviside_slope<T: Scalar>(x: T, eps: T) -> T {
    let f = smooth_heaviside(x, eps);
    f * (T::one() - f) / eps
}

/// Which branch each switch takes, for integration with the switches frozen
/// between detected crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SwitchModes {
    /// `F(q)`: chemotherapy present, drives mutation of sensitive cells.
    pub chemo: bool,
    /// `F(y)`: anti-angiogenic agent present, drives dormancy.
    pub anti_angiogenic: bool,
    /// `F(-ġ1)`: glial population shrinking, drives neuron loss.
    pub glial_decline: bool,
}

/// How the three Heaviside factors are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Switching<T = f64> {
    /// Exact step function of the current state.
    Sharp,
    /// Logistic smoothing with width `eps`.
    Smooth(T),
    /// Branches fixed regardless of the state.
    Frozen(SwitchModes),
}

impl<T: Scalar> Switching<T> {
    /// Smoothing width `eps`; zero or negative selects the sharp step.
    pub fn from_smoothing(eps: f64) -> Self {
        if eps > 0.0 {
            Switching::Smooth(T::lit(eps))
        } else {
            Switching::Sharp
        }
    }

    #[inline]
    fn factor(&self, x: T, frozen: impl Fn(&SwitchModes) -> bool) -> T {
        match self {
            Switching::Sharp => heaviside(x),
            Switching::Smooth(eps) => smooth_heaviside(x, *eps),
            Switching::Frozen(m) => {
                if frozen(m) {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    #[inline]
    fn slope(&self, x: T) -> T {
        match self {
            Switching::Smooth(eps) => smooth_heaviside_slope(x, *eps),
            _ => T::zero(),
        }
    }
}

/// Cell population hit by a chemotherapy kill term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KillTarget {
    Glial,
    Sensitive,
    Neuron,
}

impl TryFrom<u8> for KillTarget {
    type Error = Error;

    fn try_from(i: u8) -> Result<Self> {
        match i {
            1 => Ok(KillTarget::Glial),
            2 => Ok(KillTarget::Sensitive),
            5 => Ok(KillTarget::Neuron),
            other => Err(Error::InvalidKillIndex(other)),
        }
    }
}

/// Chemotherapy kill rate `d_i0 + d_i1·g4 + d_i2·y`, enhanced by endothelial
/// cells and by the anti-angiogenic agent.
#[inline]
pub fn kill_rate<T: Scalar>(target: KillTarget, g4: T, y: T, p: &NondimParams<T>) -> T {
    let (d0, d1, d2) = kill_coefficients(target, p);
    d0 + d1 * g4 + d2 * y
}

/// [`kill_rate`] addressed by the population index 1, 2 or 5.
pub fn kill_rate_by_index<T: Scalar>(i: u8, g4: T, y: T, p: &NondimParams<T>) -> Result<T> {
    Ok(kill_rate(KillTarget::try_from(i)?, g4, y, p))
}

#[inline]
pub(crate) fn kill_coefficients<T: Scalar>(target: KillTarget, p: &NondimParams<T>) -> (T, T, T) {
    match target {
        KillTarget::Glial => (p.d10, p.d11, p.d12),
        KillTarget::Sensitive => (p.d20, p.d21, p.d22),
        KillTarget::Neuron => (p.d50, p.d51, p.d52),
    }
}

/// Holling type II fraction `x / (a + x)`.
#[inline]
pub(crate) fn holling<T: Scalar>(x: T, a: T) -> T {
    x / (a + x)
}

/// Glial rate ġ1; it does not involve any switch or g5.
#[inline]
pub fn glial_rate<T: Scalar>(s: &State<T>, p: &NondimParams<T>) -> T {
    let d1 = kill_rate(KillTarget::Glial, s.g4, s.y, p);
    p.p1 * s.g1 * (T::one() - s.g1)
        - p.beta1 * s.g1 * (s.g2 + s.g3)
        - d1 * s.q * holling(s.g1, p.a1)
}

/// Exact right-hand side with sharp switches.
pub fn rhs<T: Scalar>(s: &State<T>, p: &NondimParams<T>) -> Derivative<T> {
    rhs_with(s, p, Switching::Sharp)
}

/// Right-hand side with the given switch evaluation.
pub fn rhs_with<T: Scalar>(s: &State<T>, p: &NondimParams<T>, sw: Switching<T>) -> Derivative<T> {
    let one = T::one();
    let State {
        g1,
        g2,
        g3,
        g4,
        g5,
        q,
        y,
    } = *s;

    let f_q = sw.factor(q, |m| m.chemo);
    let f_y = sw.factor(y, |m| m.anti_angiogenic);

    let d2 = kill_rate(KillTarget::Sensitive, g4, y, p);
    let d5 = kill_rate(KillTarget::Neuron, g4, y, p);

    let glioma = g2 + g3;
    let room = one - glioma / (one + p.tau * g4);

    let dg1 = glial_rate(s, p);
    let f_decline = sw.factor(-dg1, |m| m.glial_decline);

    let dg2 = p.p2 * g2 * room
        - p.beta2 * g1 * g2
        - p.u * f_q * g2
        - p.rho * f_y * g2
        - d2 * q * holling(g2, p.a2);
    let dg3 = p.p3 * g3 * room - p.beta3 * g1 * g3 + p.u * f_q * g2 - p.rho * f_y * g3;
    let dg4 = p.mu * glioma + p.p4 * g4 * (one - g4) - p.d4 * y * holling(g4, p.a4);
    let dg5 = p.alpha * dg1 * f_decline * g5 - d5 * q * holling(g5, p.a5);
    let dq = p.phi
        - (p.psi + p.c1 * holling(g1, p.a1) + p.c2 * holling(g2, p.a2) + p.c5 * holling(g5, p.a5))
            * q;
    let dy = p.delta - (p.gamma + p.c4 * holling(g4, p.a4)) * y;

    State::new(dg1, dg2, dg3, dg4, dg5, dq, dy)
}

/// Value of each switch argument `(q, y, -ġ1)` at a state.
pub fn switch_arguments<T: Scalar>(s: &State<T>, p: &NondimParams<T>) -> [T; 3] {
    [s.q, s.y, -glial_rate(s, p)]
}

pub(crate) fn switch_slope<T: Scalar>(sw: Switching<T>, x: T) -> T {
    sw.slope(x)
}
