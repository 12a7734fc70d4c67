//! Weighted least-squares fits of a single model variant.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions, LmOutcome};
use super::profile::{default_grid, flag_profile, scan_with_start, ProfileParam};
use super::{FitConfig, Identifiability};
use crate::error::{Error, Result};
use crate::experiment::MeasurementTrace;
use crate::model::{reduce_angle, trace, ExperimentGeometry, ModelKind, ModelParams};

/// Angles known in advance; `None` entries are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KnownAngles {
    #[serde(rename = "theta_I", default)]
    pub theta_i: Option<f64>,
    #[serde(rename = "theta_M", default)]
    pub theta_m: Option<f64>,
}

impl From<ExperimentGeometry> for KnownAngles {
    fn from(g: ExperimentGeometry) -> Self {
        Self {
            theta_i: Some(g.theta_i()),
            theta_m: Some(g.theta_m()),
        }
    }
}

impl From<Option<ExperimentGeometry>> for KnownAngles {
    fn from(g: Option<ExperimentGeometry>) -> Self {
        g.map(Into::into).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsHat {
    pub omega: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomHat {
    #[serde(rename = "theta_I")]
    pub theta_i: f64,
    #[serde(rename = "theta_M")]
    pub theta_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFlags {
    pub omega: Identifiability,
    pub gamma: Identifiability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: ModelKind,
    pub params_hat: ParamsHat,
    pub geom_hat: GeomHat,
    /// Whether each angle was fitted (`false` means echoed from the input).
    pub theta_i_fitted: bool,
    pub theta_m_fitted: bool,
    /// Weighted residual sum of squares at the optimum.
    pub rss: f64,
    pub n_points: usize,
    pub n_free_params: usize,
    /// BIC: `n ln(rss/n) + k ln(n)`.
    pub information_criterion: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub profile_flags: Option<ProfileFlags>,
}

impl FitReport {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.params_hat.omega, self.params_hat.gamma).expect("fitted gamma is nonnegative")
    }

    pub fn geometry(&self) -> ExperimentGeometry {
        ExperimentGeometry::new(self.geom_hat.theta_i, self.geom_hat.theta_m).expect("fitted angles are finite")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Slot {
    Free,
    Fixed(f64),
}

/// Which of (omega, gamma, theta_I, theta_M) are optimized. Free values are
/// packed in that order; gamma is carried as `u` with `gamma = u^2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub omega: Slot,
    pub gamma: Slot,
    pub theta_i: Slot,
    pub theta_m: Slot,
}

impl Layout {
    pub fn new(known: KnownAngles) -> Self {
        let slot = |a: Option<f64>| a.map_or(Slot::Free, Slot::Fixed);
        Self {
            omega: Slot::Free,
            gamma: Slot::Free,
            theta_i: slot(known.theta_i),
            theta_m: slot(known.theta_m),
        }
    }

    fn slots(&self) -> [Slot; 4] {
        [self.omega, self.gamma, self.theta_i, self.theta_m]
    }

    pub fn n_free(&self) -> usize {
        self.slots().iter().filter(|s| **s == Slot::Free).count()
    }

    /// `[omega, gamma, theta_I, theta_M]` from the packed vector.
    pub fn unpack(&self, x: &[f64]) -> [f64; 4] {
        let mut it = x.iter().copied();
        let mut out = [0.0; 4];
        for (i, slot) in self.slots().iter().enumerate() {
            out[i] = match slot {
                Slot::Fixed(v) => *v,
                Slot::Free if i == 1 => {
                    let u = it.next().expect("packed vector matches layout");
                    u * u
                }
                Slot::Free => it.next().expect("packed vector matches layout"),
            };
        }
        out
    }

    /// Packed vector for the natural values `[omega, gamma, theta_I, theta_M]`.
    pub fn pack(&self, v: [f64; 4]) -> Vec<f64> {
        self.slots()
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Slot::Free)
            .map(|(i, _)| if i == 1 { v[1].max(0.0).sqrt() } else { v[i] })
            .collect()
    }
}

/// Weighted residuals of one model against one trace.
pub(crate) struct Objective<'a> {
    pub kind: ModelKind,
    pub trace: &'a MeasurementTrace,
    pub sqrt_w: Vec<f64>,
    /// Frequencies above this alias onto lower ones on the sampling grid and
    /// are excluded from the search.
    pub omega_max: f64,
}

impl<'a> Objective<'a> {
    pub fn new(kind: ModelKind, trace: &'a MeasurementTrace) -> Self {
        Self {
            kind,
            trace,
            sqrt_w: weights(trace).into_iter().map(f64::sqrt).collect(),
            omega_max: nyquist(trace),
        }
    }

    pub fn residuals(&self, v: [f64; 4], out: &mut [f64]) {
        let (Ok(params), Ok(geom)) = (ModelParams::new(v[0], v[1]), ExperimentGeometry::new(v[2], v[3])) else {
            out.iter_mut().for_each(|r| *r = f64::INFINITY);
            return;
        };
        if v[0].abs() > self.omega_max {
            out.iter_mut().for_each(|r| *r = f64::INFINITY);
            return;
        }
        for (i, r) in out.iter_mut().enumerate() {
            let t = self.trace.times()[i];
            *r = self.sqrt_w[i] * (self.trace.estimates()[i] - trace(self.kind, params, geom, t));
        }
    }

    pub fn rss(&self, v: [f64; 4]) -> f64 {
        let mut r = vec![0.0; self.trace.len()];
        self.residuals(v, &mut r);
        r.iter().map(|x| x * x).sum()
    }

    pub fn run(&self, layout: &Layout, x0: &[f64], opts: &LmOptions) -> LmOutcome {
        minimize(
            |x, r| self.residuals(layout.unpack(x), r),
            self.trace.len(),
            x0,
            opts,
        )
    }

    /// rss below which residuals are indistinguishable from zero.
    pub fn rss_floor(&self, rms: f64) -> f64 {
        self.sqrt_w.iter().map(|s| s * s).sum::<f64>() * rms * rms
    }
}

/// `w_i = shots_i / (1 - p_i^2 + 1/(4 shots_i))`.
pub fn weights(trace: &MeasurementTrace) -> Vec<f64> {
    trace
        .estimates()
        .iter()
        .zip(trace.shots())
        .map(|(&p, &n)| {
            let n = n as f64;
            n / (1.0 - p * p + 0.25 / n)
        })
        .collect()
}

/// `n ln(rss/n) + k ln(n)` with the rss clamped below at `floor`.
pub fn bic(rss: f64, n_points: usize, n_free: usize, floor: f64) -> f64 {
    let n = n_points as f64;
    n * (rss.max(floor).max(f64::MIN_POSITIVE) / n).ln() + n_free as f64 * n.ln()
}

/// `pi` over the median sample spacing, or infinity for a single point.
pub fn nyquist(trace: &MeasurementTrace) -> f64 {
    let t = trace.times();
    let mut gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return f64::INFINITY;
    }
    gaps.sort_by(f64::total_cmp);
    PI / gaps[gaps.len() / 2]
}

/// Frequency of the largest periodogram peak of the mean-removed estimates,
/// searched on `(0, pi / median spacing]`.
pub fn dominant_frequency(trace: &MeasurementTrace) -> f64 {
    let t = trace.times();
    let span = (t[t.len() - 1] - t[0]).max(f64::MIN_POSITIVE);
    let nyquist = nyquist(trace).min(1e6 / span);
    let mean = trace.estimates().iter().sum::<f64>() / trace.len() as f64;
    let n_grid = 512;
    let mut best = (TAU / span, 0.0);
    for j in 1..=n_grid {
        let w = nyquist * j as f64 / n_grid as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &p) in t.iter().zip(trace.estimates()) {
            let (s, c) = (w * ti).sin_cos();
            re += (p - mean) * c;
            im += (p - mean) * s;
        }
        let power = re * re + im * im;
        if power > best.1 * (1.0 + 1e-12) {
            best = (w, power);
        }
    }
    best.0
}

/// Starting values `[omega, gamma, theta_I, theta_M]` for the multi-start search.
pub(crate) fn start_points(kind: ModelKind, trace: &MeasurementTrace, known: KnownAngles, n: usize, seed: u64) -> Vec<[f64; 4]> {
    let t = trace.times();
    let span = (t[t.len() - 1] - t[0]).max(1e-12);
    let w_dom = dominant_frequency(trace);
    let nyquist = nyquist(trace).min(1e6 / span);
    // 0.01/span .. 10/span, log-spaced
    let gamma_grid: Vec<f64> = (0..4).map(|i| 10f64.powi(i - 2) / span).collect();
    let angle_grid: Vec<f64> = (0..8).map(|i| i as f64 * FRAC_PI_4).collect();

    let mut omegas = Vec::new();
    for m in [1.0, 0.5, 2.0] {
        let w = (m * w_dom).min(0.999 * nyquist);
        omegas.push(w);
        if kind.is_odd_in_omega() {
            omegas.push(-w);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (omega, gamma) = if i < omegas.len() {
            (omegas[i], gamma_grid[2 + i % 2])
        } else {
            let mut w = rng.random_range(0.05..1.0) * nyquist;
            if kind.is_odd_in_omega() && rng.random_bool(0.5) {
                w = -w;
            }
            let lg = rng.random_range(-2.0..1.0f64);
            (w, 10f64.powf(lg) / span)
        };
        let ti = known.theta_i.unwrap_or_else(|| angle_grid[if i == 0 { 1 } else { rng.random_range(0..8) }]);
        let tm = known.theta_m.unwrap_or_else(|| angle_grid[if i == 0 { 1 } else { rng.random_range(0..8) }]);
        out.push([omega, gamma, ti, tm]);
    }
    out
}

pub(crate) fn lm_options(obj: &Objective<'_>, cfg: &FitConfig) -> LmOptions {
    LmOptions {
        rel_tol: cfg.tolerances.rel_rss,
        abs_floor: obj.rss_floor(cfg.tolerances.zero_rms),
        max_evals: cfg.max_evals,
    }
}

/// Result of the multi-start search before profiling.
pub(crate) struct BestFit {
    pub values: [f64; 4],
    pub rss: f64,
    pub converged: bool,
    pub evals: usize,
}

pub(crate) fn multistart(obj: &Objective<'_>, layout: &Layout, starts: &[[f64; 4]], opts: &LmOptions) -> BestFit {
    let outcomes: Vec<LmOutcome> = starts
        .par_iter()
        .map(|s| obj.run(layout, &layout.pack(*s), opts))
        .collect();
    let evals = outcomes.iter().map(|o| o.evals).sum();
    let converged = outcomes.iter().any(|o| o.converged);
    let best = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.rss.total_cmp(&b.rss).then(i.cmp(j)))
        .map(|(_, o)| o)
        .expect("at least one start");
    BestFit {
        values: layout.unpack(&best.x),
        rss: best.rss,
        converged,
        evals,
    }
}

/// Canonical representative of a fitted parameter set.
fn canonical(kind: ModelKind, v: [f64; 4]) -> [f64; 4] {
    let omega = if kind.is_odd_in_omega() { v[0] } else { v[0].abs() };
    [omega, v[1], reduce_angle(v[2]), reduce_angle(v[3])]
}

/// Fits one model to `trace`. Angles given in `known` are held fixed.
pub fn fit_model_with(kind: ModelKind, trace: &MeasurementTrace, known: KnownAngles, cfg: &FitConfig) -> Result<FitReport> {
    let layout = Layout::new(known);
    let k = layout.n_free();
    if trace.len() < k + 1 {
        return Err(Error::Contract(format!(
            "fitting {kind} with {k} free parameters needs at least {} points, trace has {}",
            k + 1,
            trace.len()
        )));
    }
    if cfg.starts == 0 {
        return Err(Error::InvalidParameter("starts must be >= 1".into()));
    }
    let mut obj = Objective::new(kind, trace);
    let opts = lm_options(&obj, cfg);
    let starts = start_points(kind, trace, known, cfg.starts, cfg.seed);
    let best = multistart(&obj, &layout, &starts, &opts);
    let values = canonical(kind, best.values);
    let floor = obj.rss_floor(cfg.tolerances.zero_rms);
    obj.omega_max = f64::INFINITY;

    let profile_flags = if cfg.profile_points > 0 {
        let mut flags = [Identifiability::Identified; 2];
        for (slot, param) in flags.iter_mut().zip([ProfileParam::Omega, ProfileParam::Gamma]) {
            let grid = default_grid(param, values, trace, cfg.profile_points);
            let curve = scan_with_start(&obj, &layout, param, &grid, values, &opts);
            *slot = flag_profile(&curve, floor, &cfg.tolerances);
        }
        Some(ProfileFlags {
            omega: flags[0],
            gamma: flags[1],
        })
    } else {
        None
    };

    Ok(FitReport {
        kind,
        params_hat: ParamsHat {
            omega: values[0],
            gamma: values[1],
        },
        geom_hat: GeomHat {
            theta_i: values[2],
            theta_m: values[3],
        },
        theta_i_fitted: known.theta_i.is_none(),
        theta_m_fitted: known.theta_m.is_none(),
        rss: best.rss,
        n_points: trace.len(),
        n_free_params: k,
        information_criterion: bic(best.rss, trace.len(), k, floor),
        converged: best.converged,
        evaluations: best.evals,
        profile_flags,
    })
}

/// Fits one model; `fixed_geom` holds both angles fixed when given.
pub fn fit_model(
    kind: ModelKind,
    trace: &MeasurementTrace,
    fixed_geom: Option<ExperimentGeometry>,
    cfg: &FitConfig,
) -> Result<FitReport> {
    fit_model_with(kind, trace, fixed_geom.into(), cfg)
}
