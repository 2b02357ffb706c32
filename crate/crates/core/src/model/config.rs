//! JSON parameter files.
//!
//! A file holds a `dimensional` block, a `nondimensional` block, or both
//! (the dimensionless block then wins). Keys match the field names of
//! [`DimensionalParams`] and [`NondimParams`]. An optional `initial_state`
//! block seeds trajectory runs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DimensionalParams, NondimParams, State};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensional: Option<DimensionalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nondimensional: Option<NondimParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<State>,
}

impl ParameterFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParameterFile =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.dimensional.is_none() && file.nondimensional.is_none() {
            return Err(Error::Config(
                "parameter file needs a `dimensional` or `nondimensional` block".into(),
            ));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The dimensionless parameter set this file describes, validated.
    pub fn resolve(&self) -> Result<NondimParams> {
        let params = match (&self.nondimensional, &self.dimensional) {
            (Some(nd), Some(_)) => {
                log::warn!("both `dimensional` and `nondimensional` blocks present; using `nondimensional`");
                *nd
            }
            (Some(nd), None) => *nd,
            (None, Some(dp)) => {
                dp.validate()?;
                dp.nondimensionalize()?
            }
            (None, None) => unreachable!("checked on load"),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Applies `key = value` overrides to a parameter set, rejecting unknown keys.
pub fn apply_overrides<'a>(
    params: &mut NondimParams,
    overrides: impl IntoIterator<Item = (&'a String, &'a f64)>,
) -> Result<()> {
    for (key, value) in overrides {
        params.set(key, *value)?;
    }
    params.validate()
}
