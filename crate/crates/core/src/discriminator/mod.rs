//! Model discrimination and parameter estimation from measurement traces.
//!
//! Every candidate model is fitted by weighted least squares (multi-start
//! Levenberg–Marquardt, `gamma = u^2` so the rate stays nonnegative) and the
//! candidates are ranked by BIC. Profile scans and a closed-form rule table
//! report which parameters a given geometry can identify.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::MeasurementTrace;
use crate::model::{ExperimentGeometry, ModelKind};

mod fit;
mod identifiability;
mod lm;
mod profile;

pub use fit::{
    bic, dominant_frequency, nyquist, fit_model, fit_model_with, weights, FitReport, GeomHat, KnownAngles, ParamsHat,
    ProfileFlags,
};
pub use identifiability::{identifiability_report, identifiability_report_with, IdentifiabilityReport, ParamStatus};
pub use lm::{minimize, LmOptions, LmOutcome};
pub use profile::{profile_scan, ProfileParam, ProfilePoint, ProfileScan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identifiability {
    Identified,
    Unidentified,
    WeaklyIdentified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Degeneracy threshold on `|sin sin|` and `|cos cos|`.
    pub deg: f64,
    /// Profile relative variation below which a parameter is unidentified.
    pub flat: f64,
    /// Profile relative variation below which a parameter is weakly identified.
    pub weak: f64,
    /// Relative rss change that ends a local search.
    pub rel_rss: f64,
    /// Weighted rms residual treated as an exact fit.
    pub zero_rms: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            deg: 1e-3,
            flat: 1e-6,
            weak: 1e-2,
            rel_rss: 1e-10,
            zero_rms: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub starts: usize,
    pub max_evals: usize,
    pub seed: u64,
    /// Grid size of the per-fit profile scans; 0 disables them.
    pub profile_points: usize,
    pub tolerances: Tolerances,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            max_evals: 2000,
            seed: 0,
            profile_points: 11,
            tolerances: Tolerances::default(),
        }
    }
}

/// JSON-facing configuration of a discrimination run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscriminationConfig {
    pub candidates: Vec<ModelKind>,
    pub fixed_geometry: Option<KnownAngles>,
    pub bic_margin: f64,
    #[serde(flatten)]
    pub fit: FitConfig,
}

impl Default for DiscriminationConfig {
    fn default() -> Self {
        Self {
            candidates: ModelKind::ALL.to_vec(),
            fixed_geometry: None,
            bic_margin: 2.0,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Selected(ModelKind),
    Inconclusive,
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Verdict::Selected(k) => s.serialize_str(k.as_str()),
            Verdict::Inconclusive => s.serialize_str("inconclusive"),
        }
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inconclusive" {
            Ok(Verdict::Inconclusive)
        } else {
            s.parse().map(Verdict::Selected).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    DegenerateGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    /// One fit per candidate, in candidate order.
    pub fits: Vec<FitReport>,
    pub verdict: Verdict,
    /// BIC gap between the two best candidates.
    pub bic_gap: f64,
    pub degeneracy: Option<Degeneracy>,
}

impl DiscriminationReport {
    pub fn fit(&self, kind: ModelKind) -> Option<&FitReport> {
        self.fits.iter().find(|f| f.kind == kind)
    }

    pub fn any_converged(&self) -> bool {
        self.fits.iter().any(|f| f.converged)
    }
}

/// Whether the sigma_z Hamiltonian and sigma_x Hamiltonian models (with
/// sigma_z dephasing) both predict an identically vanishing trace.
pub fn is_degenerate(geom: ExperimentGeometry, tol: f64) -> bool {
    let (si, ci) = geom.theta_i().sin_cos();
    let (sm, cm) = geom.theta_m().sin_cos();
    (si * sm).abs() < tol && (ci * cm).abs() < tol
}

/// Fits every candidate and selects the one with the lowest BIC, unless the
/// runner-up is within `bic_margin`.
pub fn discriminate(
    trace: &MeasurementTrace,
    candidates: &[ModelKind],
    fixed_geom: Option<ExperimentGeometry>,
    cfg: &FitConfig,
    bic_margin: f64,
) -> Result<DiscriminationReport> {
    discriminate_with(trace, candidates, fixed_geom.into(), cfg, bic_margin)
}

pub fn discriminate_with(
    trace: &MeasurementTrace,
    candidates: &[ModelKind],
    known: KnownAngles,
    cfg: &FitConfig,
    bic_margin: f64,
) -> Result<DiscriminationReport> {
    let mut kinds: Vec<ModelKind> = Vec::with_capacity(candidates.len());
    for &k in candidates {
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.len() < 2 {
        return Err(Error::Contract(format!(
            "discrimination needs at least two distinct candidates, got {}",
            kinds.len()
        )));
    }
    let fits = kinds
        .iter()
        .map(|&k| fit_model_with(k, trace, known, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&a, &b| {
        fits[a]
            .information_criterion
            .total_cmp(&fits[b].information_criterion)
            .then(a.cmp(&b))
    });
    let gap = fits[order[1]].information_criterion - fits[order[0]].information_criterion;
    let verdict = if gap < bic_margin {
        Verdict::Inconclusive
    } else {
        Verdict::Selected(fits[order[0]].kind)
    };

    let geom = match (known.theta_i, known.theta_m) {
        (Some(a), Some(b)) => ExperimentGeometry::new(a, b)?,
        _ => fits[order[0]].geometry(),
    };
    let degeneracy = is_degenerate(geom, cfg.tolerances.deg).then_some(Degeneracy::DegenerateGeometry);

    Ok(DiscriminationReport {
        fits,
        verdict,
        bic_gap: gap,
        degeneracy,
    })
}
