//! Damped oscillation kernels shared by every trace formula.
//!
//! With `d = omega^2 - gamma^2/4` and `w = sqrt(|d|)` the two kernels are
//!
//! ```text
//! c(t) = exp(-gamma t/2) cos(w t)        s(t) = exp(-gamma t/2) sin(w t) / w     (d > 0)
//! c(t) = exp(-gamma t/2) cosh(w t)       s(t) = exp(-gamma t/2) sinh(w t) / w    (d < 0)
//! c(t) = exp(-gamma t/2)                 s(t) = exp(-gamma t/2) t                (d = 0)
//! ```
//!
//! `s` is the analytic continuation of `sin(w t)/w` through `w = 0`, so every
//! formula written in terms of `c` and `s` is valid in all three regimes.

use serde::{Deserialize, Serialize};

use super::ModelParams;

/// `|d| <= CRITICAL_REL_TOL * max(1, gamma^2)` is classified as critical.
pub const CRITICAL_REL_TOL: f64 = 1e-9;

/// Inside `|d| <= SERIES_BAND` the kernels are evaluated by a Taylor series in `d`.
pub const SERIES_BAND: f64 = 1e-5;

/// The series is only used while `|d| t^2` stays below this bound.
const SERIES_MAX_PHASE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

/// Regime plus `sqrt(|omega^2 - gamma^2/4|)` (zero when critical).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFrequency {
    pub regime: Regime,
    pub value: f64,
}

/// Kernel values `(c(t), s(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampedBasisPair {
    pub c: f64,
    pub s: f64,
}

/// `omega^2 - gamma^2/4`, factored to limit cancellation near criticality.
fn discriminant(params: &ModelParams) -> f64 {
    let w = params.omega().abs();
    let h = 0.5 * params.gamma();
    (w - h) * (w + h)
}

pub fn effective_frequency(params: ModelParams) -> EffectiveFrequency {
    let d = discriminant(&params);
    let g = params.gamma();
    let tol = CRITICAL_REL_TOL * (g * g).max(1.0);
    if d > tol {
        EffectiveFrequency {
            regime: Regime::Underdamped,
            value: d.sqrt(),
        }
    } else if d < -tol {
        EffectiveFrequency {
            regime: Regime::Overdamped,
            value: (-d).sqrt(),
        }
    } else {
        EffectiveFrequency {
            regime: Regime::Critical,
            value: 0.0,
        }
    }
}

/// Evaluates `(c(t), s(t))` for `t >= 0`.
pub fn damped_kernels(params: ModelParams, t: f64) -> DampedBasisPair {
    debug_assert!(t >= 0.0, "negative time {t}");
    let half = 0.5 * params.gamma();
    let freq = effective_frequency(params);
    let d = discriminant(&params);

    if freq.regime == Regime::Critical {
        let e = (-half * t).exp();
        return DampedBasisPair { c: e, s: e * t };
    }

    if d.abs() <= SERIES_BAND && d.abs() * t * t <= SERIES_MAX_PHASE {
        // cos(sqrt(d) t) and sin(sqrt(d) t)/sqrt(d) as power series in x = -d t^2
        let e = (-half * t).exp();
        let x = -d * t * t;
        let c = 1.0 + x * (1.0 / 2.0 + x * (1.0 / 24.0 + x / 720.0));
        let s = t * (1.0 + x * (1.0 / 6.0 + x * (1.0 / 120.0 + x / 5040.0)));
        return DampedBasisPair { c: e * c, s: e * s };
    }

    let w = freq.value;
    match freq.regime {
        Regime::Underdamped => {
            let e = (-half * t).exp();
            let (sn, cs) = (w * t).sin_cos();
            DampedBasisPair {
                c: e * cs,
                s: e * sn / w,
            }
        }
        Regime::Overdamped => {
            // slow root -half + w rewritten as -omega^2 / (half + w)
            let slow = -(params.omega() * params.omega()) / (half + w);
            let a = (slow * t).exp();
            let fast_ratio = (-2.0 * w * t).exp();
            DampedBasisPair {
                c: 0.5 * a * (1.0 + fast_ratio),
                s: a * (-(-2.0 * w * t).exp_m1()) / (2.0 * w),
            }
        }
        Regime::Critical => unreachable!(),
    }
}

/// Second Bloch component factor for the sigma_x Hamiltonian with sigma_z dephasing.
pub fn phi_x2(params: ModelParams, t: f64) -> f64 {
    -params.omega() * damped_kernels(params, t).s
}

/// Third Bloch component factor for the sigma_x Hamiltonian with sigma_z dephasing.
pub fn phi_x3(params: ModelParams, t: f64) -> f64 {
    let k = damped_kernels(params, t);
    k.c + 0.5 * params.gamma() * k.s
}

pub fn phi_y1(params: ModelParams, t: f64) -> f64 {
    let k = damped_kernels(params, t);
    k.c - 0.5 * params.gamma() * k.s
}

/// Identical to [`phi_x3`].
pub fn phi_y3(params: ModelParams, t: f64) -> f64 {
    let k = damped_kernels(params, t);
    k.c + 0.5 * params.gamma() * k.s
}
