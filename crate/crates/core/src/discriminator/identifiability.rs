//! Closed-form identifiability of `(omega, gamma)` from a noiseless trace.

use serde::{Deserialize, Serialize};

use super::{Identifiability, Tolerances};
use crate::model::{ExperimentGeometry, ModelKind};


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStatus {
    pub status: Identifiability,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    pub kind: ModelKind,
    pub omega: ParamStatus,
    pub gamma: ParamStatus,
}

fn status(identified: bool, reason: impl Into<String>) -> ParamStatus {
    ParamStatus {
        status: if identified {
            Identifiability::Identified
        } else {
            Identifiability::Unidentified
        },
        reason: reason.into(),
    }
}

/// [`identifiability_report_with`] at the default degeneracy tolerance.
pub fn identifiability_report(kind: ModelKind, geom: ExperimentGeometry) -> IdentifiabilityReport {
    identifiability_report_with(kind, geom, Tolerances::default().deg)
}

/// Rule-table verdicts; trigonometric products with magnitude below `zero_tol`
/// count as zero, so angles rounded near multiples of pi/2 behave like the
/// exact values.
pub fn identifiability_report_with(kind: ModelKind, geom: ExperimentGeometry, zero_tol: f64) -> IdentifiabilityReport {
    let (si, ci) = geom.theta_i().sin_cos();
    let (sm, cm) = geom.theta_m().sin_cos();
    let nonzero = |x: f64| x.abs() >= zero_tol;

    let (omega, gamma) = match kind {
        ModelKind::M1z => {
            if nonzero(si * sm) {
                let r = "sin(theta_I) sin(theta_M) != 0: the oscillating term is visible";
                (status(true, r), status(true, r))
            } else if !nonzero(si) {
                let r = "sin(theta_I) = 0: the prepared state is stationary, the trace is constant";
                (status(false, r), status(false, r))
            } else {
                let r = "sin(theta_M) = 0: the measurement only sees the conserved sigma_z component";
                (status(false, r), status(false, r))
            }
        }
        ModelKind::M1x => {
            if nonzero(ci * cm) {
                let r = "cos(theta_I) cos(theta_M) != 0: the oscillating term is visible";
                (status(true, r), status(true, r))
            } else if !nonzero(ci) {
                let r = "cos(theta_I) = 0: the prepared state is stationary, the trace is constant";
                (status(false, r), status(false, r))
            } else {
                let r = "cos(theta_M) = 0: the measurement only sees the conserved sigma_x component";
                (status(false, r), status(false, r))
            }
        }
        ModelKind::M1y => {
            let r = "preparation and measurement lie in the xz-plane, orthogonal to the sigma_y axis";
            (status(true, r), status(true, r))
        }
        ModelKind::M2 => {
            if nonzero(ci * cm) {
                let r = "cos(theta_I) cos(theta_M) != 0: the damped oscillation depends on omega and gamma";
                (status(true, r), status(true, r))
            } else if nonzero(si * sm) {
                (
                    status(
                        false,
                        "cos(theta_I) cos(theta_M) = 0: only the exp(-gamma t) term survives, independent of omega",
                    ),
                    status(true, "sin(theta_I) sin(theta_M) != 0: the exp(-gamma t) decay is visible"),
                )
            } else {
                let r = "sin(theta_I) sin(theta_M) = cos(theta_I) cos(theta_M) = 0: the trace vanishes identically";
                (status(false, r), status(false, r))
            }
        }
        ModelKind::M3 => {
            let r = "no preparation/measurement pair removes the parameter dependence";
            (status(true, r), status(true, r))
        }
    };
    IdentifiabilityReport { kind, omega, gamma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn g(a: f64, b: f64) -> ExperimentGeometry {
        ExperimentGeometry::new(a, b).unwrap()
    }

    #[test]
    fn m1z_orthogonal_axes_identify_both() {
        let r = identifiability_report(ModelKind::M1z, g(FRAC_PI_2, FRAC_PI_2));
        assert_eq!(r.omega.status, Identifiability::Identified);
        assert_eq!(r.gamma.status, Identifiability::Identified);
        let r = identifiability_report(ModelKind::M1z, g(0.0, FRAC_PI_2));
        assert_eq!(r.omega.status, Identifiability::Unidentified);
    }

    #[test]
    fn m2_eigenstate_preparation_identifies_gamma_only() {
        for tm in [0.3, 1.0, FRAC_PI_2, 2.0] {
            let r = identifiability_report(ModelKind::M2, g(FRAC_PI_2, tm));
            assert_eq!(r.gamma.status, Identifiability::Identified, "theta_M={tm}");
            assert_eq!(r.omega.status, Identifiability::Unidentified, "theta_M={tm}");
        }
        let r = identifiability_report(ModelKind::M2, g(FRAC_PI_2, 0.0));
        assert_eq!(r.gamma.status, Identifiability::Unidentified);
    }

    #[test]
    fn m3_and_m1y_always_identified() {
        for a in [0.0, FRAC_PI_4, FRAC_PI_2, 3.0] {
            for b in [0.0, FRAC_PI_4, FRAC_PI_2, 5.0] {
                for kind in [ModelKind::M3, ModelKind::M1y] {
                    let r = identifiability_report(kind, g(a, b));
                    assert_eq!(r.omega.status, Identifiability::Identified);
                    assert_eq!(r.gamma.status, Identifiability::Identified);
                }
            }
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounded_right_angle_counts_as_exact() {
        let r = identifiability_report(ModelKind::M2, g(1.5708, 0.3));
        assert_eq!(r.omega.status, Identifiability::Unidentified);
        assert_eq!(r.gamma.status, Identifiability::Identified);
        let r = identifiability_report_with(ModelKind::M2, g(1.5708, 0.3), 1e-12);
        assert_eq!(r.omega.status, Identifiability::Identified);
    }

    #[test]
    fn m1x_uses_rotated_rule() {
        let r = identifiability_report(ModelKind::M1x, g(0.0, FRAC_PI_4));
        assert_eq!(r.omega.status, Identifiability::Identified);
        let r = identifiability_report(ModelKind::M1x, g(FRAC_PI_2, FRAC_PI_4));
        assert_eq!(r.omega.status, Identifiability::Unidentified);
    }
}
