use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Component names in storage order.
pub const COMPONENTS: [&str; 7] = ["g1", "g2", "g3", "g4", "g5", "q", "y"];

pub const G1: usize = 0;
pub const G2: usize = 1;
pub const G3: usize = 2;
pub const G4: usize = 3;
pub const G5: usize = 4;
pub const Q: usize = 5;
pub const Y: usize = 6;

/// Dimensionless concentrations: glial, sensitive glioma, resistant glioma,
/// endothelial, neuron, chemotherapy agent, anti-angiogenic agent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T = f64> {
    pub g1: T,
    pub g2: T,
    pub g3: T,
    pub g4: T,
    pub g5: T,
    pub q: T,
    pub y: T,
}

/// Time derivative of a [`State`], one component per equation (day⁻¹).
pub type Derivative<T = f64> = State<T>;

impl<T: Scalar> State<T> {
    pub fn new(g1: T, g2: T, g3: T, g4: T, g5: T, q: T, y: T) -> Self {
        Self {
            g1,
            g2,
            g3,
            g4,
            g5,
            q,
            y,
        }
    }

    pub fn zeros() -> Self {
        Self::from_array([T::zero(); 7])
    }

    pub fn from_array(a: [T; 7]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6])
    }

    pub fn to_array(&self) -> [T; 7] {
        [self.g1, self.g2, self.g3, self.g4, self.g5, self.q, self.y]
    }

    pub fn get(&self, i: usize) -> T {
        self.to_array()[i]
    }

    /// Sensitive plus resistant glioma.
    pub fn burden(&self) -> T {
        self.g2 + self.g3
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// ∞-norm.
    pub fn max_abs(&self) -> T {
        self.to_array()
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn distance(&self, other: &Self) -> T {
        let a = self.to_array();
        let b = other.to_array();
        (0..7).fold(T::zero(), |m, i| m.max((a[i] - b[i]).abs()))
    }

    /// Rejects negative or non-finite components.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in COMPONENTS.iter().zip(self.to_array()) {
            let v = v.to_f64_lossy();
            if !v.is_finite() {
                return Err(Error::InvalidState {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
            if v < 0.0 {
                return Err(Error::InvalidState {
                    name,
                    value: v,
                    reason: "concentrations must be nonnegative",
                });
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> State<U> {
        State::from_array(self.to_array().map(|v| U::lit(v.to_f64_lossy())))
    }
}
