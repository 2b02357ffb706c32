//! Seven-compartment glioma model under chemotherapy and anti-angiogenic
//! therapy.
//!
//! State `(g1, g2, g3, g4, g5, q, y)`: glial cells, chemo-sensitive and
//! chemo-resistant glioma, endothelial cells, neurons, chemotherapy agent,
//! anti-angiogenic agent, all scaled by their carrying capacities.
//!
//! * [`model`]: parameter sets, the right-hand side and config files.
//! * [`equilibria`]: `E0`, `E1`, `E2` from closed forms plus Newton refinement.
//! * [`stability`]: analytic Jacobian, spectra, classification, theorem checks.
//! * [`simulate`]: switch-aware Dormand–Prince integration.
//! * [`scenarios`]: named experiments, sweeps and artifact output.
//!
//! The model and the integrator are generic over [`Scalar`]; the aliases
//! below fix the precision.

pub mod equilibria;
mod error;
pub mod model;
mod scalar;
pub mod scenarios;
pub mod simulate;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use model::{DimensionalParams, NondimParams, State};

/// Double-precision parameter set; the default for all analysis.
pub type Params = model::NondimParams<f64>;
pub type Params32 = model::NondimParams<f32>;
pub type State64 = model::State<f64>;
pub type State32 = model::State<f32>;
pub type Trajectory64 = simulate::Trajectory<f64>;
pub type Trajectory32 = simulate::Trajectory<f32>;
