//! Domain types and closed-form dynamics of the five model variants.
//!
//! All models share the pure-dephasing Lindbladian with the dephasing rate
//! `gamma` and a static Hamiltonian of angular frequency `omega`. The state is
//! the coherence (Bloch) vector `v_a = Tr(rho sigma_a)`; the system is
//! prepared in `cos(theta_I/2)|0> + sin(theta_I/2)|1>` and measured with the
//! two-outcome observable whose `+1` state has polar angle `theta_M` in the
//! xz-plane.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod kernels;
mod trace;
mod trajectory;

pub use kernels::{
    damped_kernels, effective_frequency, phi_x2, phi_x3, phi_y1, phi_y3, DampedBasisPair,
    EffectiveFrequency, Regime, CRITICAL_REL_TOL, SERIES_BAND,
};
pub use trace::{trace, trace_m1x, trace_m1y, trace_m1z, trace_m2, trace_m3};
pub use trajectory::bloch_trajectory;

/// Slack allowed on `|v| <= 1` and `|p| <= 1` for rounding.
pub const UNIT_SLACK: f64 = 1e-12;

/// Coherence vector of a qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl BlochVector {
    pub const fn new(vx: f64, vy: f64, vz: f64) -> Self {
        Self { vx, vy, vz }
    }

    /// Pure state `cos(theta/2)|0> + sin(theta/2)|1>`.
    pub fn from_preparation_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(s, 0.0, c)
    }

    pub fn norm(&self) -> f64 {
        (self.vx * self.vx + self.vy * self.vy + self.vz * self.vz).sqrt()
    }

    /// Whether the vector lies in the closed unit ball (up to [`UNIT_SLACK`]).
    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + UNIT_SLACK
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Which Hamiltonian/dephasing structure generated the dynamics.
///
/// | kind  | Hamiltonian | dephasing |
/// |-------|-------------|-----------|
/// | `M1z` | sigma_z     | sigma_z   |
/// | `M1x` | sigma_x     | sigma_x   |
/// | `M1y` | sigma_y     | sigma_y   |
/// | `M2`  | sigma_x     | sigma_z   |
/// | `M3`  | sigma_y     | sigma_z   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    M1z,
    M1x,
    M1y,
    M2,
    M3,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::M1z,
        ModelKind::M1x,
        ModelKind::M1y,
        ModelKind::M2,
        ModelKind::M3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::M1z => "m1z",
            ModelKind::M1x => "m1x",
            ModelKind::M1y => "m1y",
            ModelKind::M2 => "m2",
            ModelKind::M3 => "m3",
        }
    }

    /// Whether the measurement trace can change when `omega` flips sign.
    pub fn is_odd_in_omega(self) -> bool {
        matches!(self, ModelKind::M1y | ModelKind::M3)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m1z" | "m1" | "m1a" => Ok(ModelKind::M1z),
            "m1x" | "m1b" => Ok(ModelKind::M1x),
            "m1y" | "m1c" => Ok(ModelKind::M1y),
            "m2" => Ok(ModelKind::M2),
            "m3" => Ok(ModelKind::M3),
            other => Err(Error::InvalidParameter(format!(
                "unknown model `{other}` (expected one of m1z, m1x, m1y, m2, m3)"
            ))),
        }
    }
}

/// Hamiltonian frequency and dephasing rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    omega: f64,
    gamma: f64,
}

impl ModelParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be finite, got {omega}")));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        Ok(Self { omega, gamma })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Preparation and measurement angles, stored reduced to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGeometry {
    theta_i: f64,
    theta_m: f64,
}

impl ExperimentGeometry {
    pub fn new(theta_i: f64, theta_m: f64) -> Result<Self> {
        if !theta_i.is_finite() || !theta_m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "angles must be finite, got theta_I={theta_i}, theta_M={theta_m}"
            )));
        }
        Ok(Self {
            theta_i: reduce_angle(theta_i),
            theta_m: reduce_angle(theta_m),
        })
    }

    pub fn theta_i(&self) -> f64 {
        self.theta_i
    }

    pub fn theta_m(&self) -> f64 {
        self.theta_m
    }
}

/// Reduces an angle to `[0, 2pi)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}
