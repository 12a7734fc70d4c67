//! Profile scans: the rss minimized over all other free parameters while one
//! of `omega`, `gamma` is held at each grid value.

use serde::{Deserialize, Serialize};

use super::fit::{lm_options, multistart, start_points, KnownAngles, Layout, Objective, Slot};
use super::lm::LmOptions;
use super::{FitConfig, Identifiability, Tolerances};
use crate::error::{Error, Result};
use crate::experiment::MeasurementTrace;
use crate::model::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileParam {
    Omega,
    Gamma,
}

impl ProfileParam {
    fn index(self) -> usize {
        match self {
            ProfileParam::Omega => 0,
            ProfileParam::Gamma => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub value: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileScan {
    pub param: ProfileParam,
    pub points: Vec<ProfilePoint>,
    /// `(max - min) / max(min, floor)` over the curve.
    pub relative_variation: f64,
    pub flag: Identifiability,
}

/// Profiles `param` over `grid`, holding the angles in `known` fixed.
pub fn profile_scan(
    kind: ModelKind,
    trace: &MeasurementTrace,
    param: ProfileParam,
    grid: &[f64],
    known: KnownAngles,
    cfg: &FitConfig,
) -> Result<ProfileScan> {
    if grid.is_empty() {
        return Err(Error::Contract("profile grid is empty".into()));
    }
    if param == ProfileParam::Gamma && grid.iter().any(|g| g.is_nan() || *g < 0.0) {
        return Err(Error::InvalidParameter("gamma grid values must be >= 0".into()));
    }
    let layout = Layout::new(known);
    if trace.len() < layout.n_free() + 1 {
        return Err(Error::Contract(format!(
            "profiling needs at least {} points, trace has {}",
            layout.n_free() + 1,
            trace.len()
        )));
    }
    let mut obj = Objective::new(kind, trace);
    let opts = lm_options(&obj, cfg);
    let starts = start_points(kind, trace, known, cfg.starts.max(1), cfg.seed);
    let best = multistart(&obj, &layout, &starts, &opts);
    // the grid is the caller's choice, aliased or not
    obj.omega_max = f64::INFINITY;
    let points = scan_with_start(&obj, &layout, param, grid, best.values, &opts);
    let floor = obj.rss_floor(cfg.tolerances.zero_rms);
    Ok(ProfileScan {
        param,
        relative_variation: relative_variation(&points, floor),
        flag: flag_profile(&points, floor, &cfg.tolerances),
        points,
    })
}

pub(crate) fn scan_with_start(
    obj: &Objective<'_>,
    layout: &Layout,
    param: ProfileParam,
    grid: &[f64],
    start: [f64; 4],
    opts: &LmOptions,
) -> Vec<ProfilePoint> {
    let mut previous: Option<[f64; 4]> = None;
    grid.iter()
        .map(|&value| {
            let mut fixed = *layout;
            match param {
                ProfileParam::Omega => fixed.omega = Slot::Fixed(value),
                ProfileParam::Gamma => fixed.gamma = Slot::Fixed(value),
            }
            let mut best: Option<([f64; 4], f64)> = None;
            for seed in [Some(start), previous].into_iter().flatten() {
                let mut s = seed;
                s[param.index()] = value;
                let (values, rss) = if fixed.n_free() == 0 {
                    (s, obj.rss(s))
                } else {
                    let out = obj.run(&fixed, &fixed.pack(s), opts);
                    (fixed.unpack(&out.x), out.rss)
                };
                if best.is_none_or(|(_, b)| rss < b) {
                    best = Some((values, rss));
                }
            }
            let (values, rss) = best.expect("at least one seed");
            previous = Some(values);
            ProfilePoint { value, rss }
        })
        .collect()
}

fn relative_variation(points: &[ProfilePoint], floor: f64) -> f64 {
    let min = points.iter().map(|p| p.rss).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.rss).fold(f64::NEG_INFINITY, f64::max);
    (max - min) / min.max(floor).max(f64::MIN_POSITIVE)
}

pub(crate) fn flag_profile(points: &[ProfilePoint], floor: f64, tol: &Tolerances) -> Identifiability {
    let r = relative_variation(points, floor);
    if r < tol.flat {
        Identifiability::Unidentified
    } else if r < tol.weak {
        Identifiability::WeaklyIdentified
    } else {
        Identifiability::Identified
    }
}

/// `n` values spanning +-50% of the estimate, widened to the trace's
/// natural frequency or rate scale when the estimate is small.
pub(crate) fn default_grid(param: ProfileParam, values: [f64; 4], trace: &MeasurementTrace, n: usize) -> Vec<f64> {
    let t = trace.times();
    let span = (t[t.len() - 1] - t[0]).max(1e-12);
    let center = values[param.index()];
    let scale = match param {
        ProfileParam::Omega => std::f64::consts::PI / span,
        ProfileParam::Gamma => 1.0 / span,
    };
    let half = 0.5 * center.abs().max(scale);
    let (lo, hi) = match param {
        ProfileParam::Omega => (center - half, center + half),
        ProfileParam::Gamma => ((center - half).max(0.0), center + half),
    };
    if n == 1 {
        return vec![center];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
