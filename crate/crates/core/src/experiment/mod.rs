//! Synthetic measurement records with finite-shot binomial noise.
//!
//! Each delay `t` is measured `shots` times; every shot is an independent
//! two-outcome projective measurement with `P(+1) = (1 + p(t)) / 2`, so the
//! shot-averaged estimate is `2k/shots - 1` with `k ~ Binomial(shots, P(+1))`.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{trace, ExperimentGeometry, ModelKind, ModelParams, UNIT_SLACK};

mod io;

pub use io::{export_trace, import_trace, read_csv, read_json, write_csv, write_json, TraceFormat};

/// Generator algorithm recorded in the metadata of synthetic traces.
pub const RNG_NAME: &str = "chacha8 (rand_chacha 0.9) + binomial (rand_distr 0.5)";

/// Default number of points of the automatic time grid.
pub const AUTO_GRID_POINTS: usize = 50;

/// Provenance of a synthetic trace. Absent fields are omitted when serialized.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "theta_I", default, skip_serializing_if = "Option::is_none")]
    pub theta_i: Option<f64>,
    #[serde(rename = "theta_M", default, skip_serializing_if = "Option::is_none")]
    pub theta_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

/// Shot-averaged outcomes at strictly increasing delays.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTrace {
    times: Vec<f64>,
    estimates: Vec<f64>,
    shots: Vec<u64>,
    meta: Option<TraceMeta>,
}

impl MeasurementTrace {
    pub fn new(times: Vec<f64>, estimates: Vec<f64>, shots: Vec<u64>, meta: Option<TraceMeta>) -> Result<Self> {
        if times.len() != estimates.len() || times.len() != shots.len() {
            return Err(Error::InvalidTrace(format!(
                "column lengths differ: {} times, {} estimates, {} shot counts",
                times.len(),
                estimates.len(),
                shots.len()
            )));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidTrace(format!("point {i}: time {t} is not a finite value >= 0")));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::InvalidTrace(format!(
                    "point {i}: times must be strictly increasing ({} then {t})",
                    times[i - 1]
                )));
            }
        }
        for (i, &p) in estimates.iter().enumerate() {
            if !p.is_finite() || p.abs() > 1.0 {
                return Err(Error::InvalidTrace(format!("point {i}: estimate {p} outside [-1, 1]")));
            }
        }
        if let Some(i) = shots.iter().position(|&s| s == 0) {
            return Err(Error::InvalidTrace(format!("point {i}: shot count must be positive")));
        }
        Ok(Self {
            times,
            estimates,
            shots,
            meta,
        })
    }

    /// Exact model values at every time, recorded as if measured with `shots` shots.
    pub fn noiseless(
        kind: ModelKind,
        params: ModelParams,
        geom: ExperimentGeometry,
        times: &[f64],
        shots: u64,
    ) -> Result<Self> {
        let estimates = times
            .iter()
            .map(|&t| trace(kind, params, geom, t).clamp(-1.0, 1.0))
            .collect();
        let meta = TraceMeta {
            kind: Some(kind),
            omega: Some(params.omega()),
            gamma: Some(params.gamma()),
            theta_i: Some(geom.theta_i()),
            theta_m: Some(geom.theta_m()),
            ..Default::default()
        };
        Self::new(times.to_vec(), estimates, vec![shots; times.len()], Some(meta))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn shots(&self) -> &[u64] {
        &self.shots
    }

    pub fn meta(&self) -> Option<&TraceMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same points with every shot count multiplied by `factor`.
    pub fn with_scaled_shots(&self, factor: u64) -> Result<Self> {
        Self::new(
            self.times.clone(),
            self.estimates.clone(),
            self.shots.iter().map(|s| s * factor).collect(),
            self.meta.clone(),
        )
    }
}

/// Draws one shot-averaged estimate per time point, deterministically per seed.
pub fn sample_trace(
    kind: ModelKind,
    params: ModelParams,
    geom: ExperimentGeometry,
    times: &[f64],
    shots: u64,
    seed: u64,
) -> Result<MeasurementTrace> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    // validates the time grid before any sampling
    MeasurementTrace::new(times.to_vec(), vec![0.0; times.len()], vec![shots; times.len()], None)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimates = Vec::with_capacity(times.len());
    for &t in times {
        let p = trace(kind, params, geom, t);
        if p.is_nan() || p.abs() > 1.0 + UNIT_SLACK {
            return Err(Error::NumericalFailure(format!(
                "model {kind} produced p = {p} at t = {t}, outside [-1, 1]"
            )));
        }
        let prob = (0.5 * (1.0 + p)).clamp(0.0, 1.0);
        let dist = Binomial::new(shots, prob)
            .map_err(|e| Error::NumericalFailure(format!("binomial({shots}, {prob}): {e}")))?;
        let k = dist.sample(&mut rng);
        estimates.push(2.0 * k as f64 / shots as f64 - 1.0);
    }
    let meta = TraceMeta {
        kind: Some(kind),
        omega: Some(params.omega()),
        gamma: Some(params.gamma()),
        theta_i: Some(geom.theta_i()),
        theta_m: Some(geom.theta_m()),
        seed: Some(seed),
        rng: Some(RNG_NAME.to_string()),
    };
    MeasurementTrace::new(times.to_vec(), estimates, vec![shots; times.len()], Some(meta))
}

/// `points` uniform delays on `[0, t_max]`, endpoints included.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if t_max.is_nan() || t_max <= 0.0 || t_max.is_infinite() {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    if points < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 grid points, got {points}")));
    }
    let step = t_max / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { t_max } else { step * i as f64 }).collect())
}

/// Horizon `3 max(1/gamma, 2pi/max(|omega|, gamma))` covering both the decay and
/// oscillation scales. Zero rates drop out; with no scale at all the horizon is 3.
pub fn auto_horizon(params: ModelParams) -> f64 {
    let (w, g) = (params.omega().abs(), params.gamma());
    let mut scale: f64 = 0.0;
    if g > 0.0 {
        scale = scale.max(1.0 / g);
    }
    let fastest = w.max(g);
    if fastest > 0.0 {
        scale = scale.max(TAU / fastest);
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    3.0 * scale
}

/// The default 50-point grid on `[0, auto_horizon(params)]`.
pub fn auto_grid(params: ModelParams) -> Vec<f64> {
    uniform_grid(auto_horizon(params), AUTO_GRID_POINTS).expect("horizon is positive")
}
