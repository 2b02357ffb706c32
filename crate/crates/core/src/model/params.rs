//! Dimensional and dimensionless parameter sets and the map between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

macro_rules! param_struct {
    (
        $(#[$meta:meta])*
        $name:ident { $($(#[$fmeta:meta])* $field:ident),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name<T = f64> {
            $($(#[$fmeta])* pub $field: T,)+
        }

        impl<T: Scalar> $name<T> {
            /// Field names in declaration order, as used in config files.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),+];

            /// `(key, value)` pairs in declaration order.
            pub fn entries(&self) -> Vec<(&'static str, T)> {
                vec![$((stringify!($field), self.$field)),+]
            }

            pub fn get(&self, key: &str) -> Option<T> {
                match key {
                    $(stringify!($field) => Some(self.$field),)+
                    _ => None,
                }
            }

            pub fn set(&mut self, key: &str, value: T) -> Result<()> {
                match key {
                    $(stringify!($field) => { self.$field = value; Ok(()) })+
                    _ => Err(Error::UnknownKey(key.to_string())),
                }
            }

            pub fn cast<U: Scalar>(&self) -> $name<U> {
                $name { $($field: U::lit(self.$field.to_f64_lossy()),)+ }
            }
        }
    };
}

param_struct! {
    /// Parameters of the model in physical units (rates in day⁻¹, capacities
    /// and half-saturation constants in kg·m⁻³).
    #[allow(non_snake_case)]
    DimensionalParams {
        p1, p2, p3, p4,
        k1, k2, k3,
        /// Listed alongside k1..k3 but not used by any equation.
        k4,
        kappa1, kappa2, kappa3,
        chi, u, rho, Phi, omega,
        D10, D11, D12, D20, D21, D22, D50, D51, D52, D4,
        A1, A2, A4, A5,
        phi, psi, delta, gamma,
        c1, c2, c4, c5,
    }
}

param_struct! {
    /// Parameters of the dimensionless system; the canonical set for all computation.
    NondimParams {
        p1, p2, p3, p4,
        beta1, beta2, beta3,
        tau, mu, alpha, u, rho,
        a1, a2, a4, a5,
        d10, d11, d12, d20, d21, d22, d50, d51, d52, d4,
        phi, psi, delta, gamma,
        c1, c2, c4, c5,
    }
}

fn check<T: Scalar>(name: &str, v: T, strictly_positive: bool, unit_interval: bool) -> Result<()> {
    let value = v.to_f64_lossy();
    let bad = |reason| {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            value,
            reason,
        })
    };
    if !value.is_finite() {
        return bad("must be finite");
    }
    if value < 0.0 {
        return bad("must be nonnegative");
    }
    if strictly_positive && value <= 0.0 {
        return bad("must be strictly positive");
    }
    if unit_interval && value > 1.0 {
        return bad("must lie in [0, 1]");
    }
    Ok(())
}

impl<T: Scalar> DimensionalParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in self.entries() {
            let positive = matches!(
                key,
                "k1" | "k2" | "k3" | "k4" | "psi" | "gamma" | "A1" | "A2" | "A4" | "A5"
            );
            let unit = matches!(key, "u" | "rho");
            check(key, v, positive, unit)?;
        }
        Ok(())
    }

    /// Rescales by the carrying capacities to obtain the dimensionless system.
    pub fn nondimensionalize(&self) -> Result<NondimParams<T>> {
        for (key, k) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if k <= T::zero() {
                return Err(Error::InvalidParameter {
                    name: key.to_string(),
                    value: k.to_f64_lossy(),
                    reason: "carrying capacity must be strictly positive",
                });
            }
        }
        let (k1, k2, k3) = (self.k1, self.k2, self.k3);
        // G5 shares k1 with the glial cells; A5 and the d5j are scaled by it.
        let k5 = k1;
        Ok(NondimParams {
            p1: self.p1,
            p2: self.p2,
            p3: self.p3,
            p4: self.p4,
            beta1: self.kappa1 * k2,
            beta2: self.kappa2 * k1,
            beta3: self.kappa3 * k1,
            tau: self.chi * k3 / k2,
            mu: self.Phi * k3 / k2,
            alpha: self.omega * k1,
            u: self.u,
            rho: self.rho,
            a1: self.A1 / k1,
            a2: self.A2 / k2,
            a4: self.A4 / k3,
            a5: self.A5 / k5,
            d10: self.D10 / k1,
            d11: self.D11 * k3 / k1,
            d12: self.D12 / k1,
            d20: self.D20 / k2,
            d21: self.D21 * k3 / k2,
            d22: self.D22 / k2,
            d50: self.D50 / k5,
            d51: self.D51 * k3 / k5,
            d52: self.D52 / k5,
            d4: self.D4 / k3,
            phi: self.phi,
            psi: self.psi,
            delta: self.delta,
            gamma: self.gamma,
            c1: self.c1,
            c2: self.c2,
            c4: self.c4,
            c5: self.c5,
        })
    }
}

impl<T: Scalar> NondimParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in self.entries() {
            let positive = matches!(key, "psi" | "gamma" | "a1" | "a2" | "a4" | "a5");
            let unit = matches!(key, "u" | "rho");
            check(key, v, positive, unit)?;
        }
        Ok(())
    }
}

impl DimensionalParams<f64> {
    /// Physical parameter values of the reference parameter table. The free
    /// parameters u, ρ, ω are pinned to the glioma-free experiment (u = 0.001,
    /// ρ = 0.01, ω·k1 = 2).
    pub fn reference() -> Self {
        let k = 510.0;
        Self {
            p1: 0.0068,
            p2: 0.012,
            p3: 0.002,
            p4: 0.002,
            k1: k,
            k2: k,
            k3: k,
            k4: k,
            kappa1: 3.6e-5,
            kappa2: 3.6e-6,
            kappa3: 3.6e-6,
            chi: 0.15,
            u: 0.001,
            rho: 0.01,
            Phi: 0.004,
            omega: 2.0 / k,
            D10: 2.4e-5,
            D11: 4.0e-8,
            D12: 2.0e-5,
            D20: 4.0e1,
            D21: 4.0e-2,
            D22: 3.8e3,
            D50: 2.4,
            D51: 4.0e-3,
            D52: 2.0,
            D4: 3.6e2,
            A1: k,
            A2: k,
            A4: k,
            A5: k,
            phi: 3.3e-3,
            psi: 0.01813,
            delta: 2.4e-4,
            gamma: 0.136,
            c1: 0.0002,
            c2: 0.032,
            c4: 0.032,
            c5: 0.0012,
        }
    }
}

impl NondimParams<f64> {
    /// Tabulated dimensionless values (rounded as published) with u = 0.001,
    /// ρ = 0.01, α = 2: the glioma-free experiment.
    pub fn glioma_free() -> Self {
        Self {
            p1: 0.0068,
            p2: 0.012,
            p3: 0.002,
            p4: 0.002,
            beta1: 1.8e-2,
            beta2: 1.8e-3,
            beta3: 1.8e-3,
            tau: 0.15,
            mu: 0.004,
            alpha: 2.0,
            u: 0.001,
            rho: 0.01,
            a1: 1.0,
            a2: 1.0,
            a4: 1.0,
            a5: 1.0,
            d10: 4.7e-8,
            d11: 4.0e-8,
            d12: 3.9e-8,
            d20: 7.8e-2,
            d21: 4.0e-2,
            d22: 7.5,
            d50: 4.7e-3,
            d51: 4.0e-3,
            d52: 3.9e-3,
            d4: 0.71,
            phi: 3.3e-3,
            psi: 0.01813,
            delta: 2.4e-4,
            gamma: 0.136,
            c1: 0.0002,
            c2: 0.032,
            c4: 0.032,
            c5: 0.0012,
        }
    }

    /// Resistant-glioma experiment: p3 = 0.006, u = 0.01, ρ = 0.003,
    /// φ = 4.0e-3, δ = 2.9e-4, α = 2.
    pub fn resistant() -> Self {
        Self {
            p3: 0.006,
            u: 0.01,
            rho: 0.003,
            phi: 4.0e-3,
            delta: 2.9e-4,
            ..Self::glioma_free()
        }
    }
}
