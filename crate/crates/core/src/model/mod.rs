//! Parameter sets, state vector and the model right-hand side.

mod config;
mod params;
mod rhs;
mod state;

pub use config::{apply_overrides, ParameterFile};
pub use params::{DimensionalParams, NondimParams};
pub use rhs::{
    glial_rate, heaviside, kill_rate, kill_rate_by_index, rhs, rhs_with, smooth_heaviside,
    switch_arguments, KillTarget, SwitchModes, Switching,
};
pub use state::{Derivative, State, COMPONENTS, G1, G2, G3, G4, G5, Q, Y};

pub(crate) use rhs::{holling, kill_coefficients, switch_slope};
