//! Numerical propagation of the general Bloch equation, independent of the
//! closed forms in [`crate::model`].
//!
//! Two engines solve `dv/dt = A v` for the constant generator `A`: a
//! scaling-and-squaring matrix exponential (default) and an adaptive
//! Dormand–Prince 5(4) integrator. A density-matrix integrator of the full
//! master equation lives in [`lindblad`].

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlochVector, ExperimentGeometry, ModelKind, ModelParams};

mod expm;
pub mod lindblad;
mod rk45;

pub use expm::expm;
pub use rk45::{integrate, Rk45Options};

/// Generator of the Bloch equation with sigma_z dephasing:
///
/// ```text
/// [ -gamma   -omega_z  -omega_y ]
/// [ omega_z  -gamma    -omega_x ]
/// [ omega_y   omega_x   0       ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGenerator {
    matrix: Matrix3<f64>,
}

impl BlochGenerator {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }
}

pub fn build_generator(omega_x: f64, omega_y: f64, omega_z: f64, gamma: f64) -> Result<BlochGenerator> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite and nonnegative, got {gamma}"
        )));
    }
    if ![omega_x, omega_y, omega_z].iter().all(|w| w.is_finite()) {
        return Err(Error::InvalidParameter("frequencies must be finite".into()));
    }
    #[rustfmt::skip]
    let matrix = Matrix3::new(
        -gamma,   -omega_z, -omega_y,
        omega_z,  -gamma,   -omega_x,
        omega_y,  omega_x,  0.0,
    );
    Ok(BlochGenerator { matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    MatrixExponential,
    Adaptive,
}

/// `exp(A t) v0` for `t >= 0`.
pub fn propagate(gen: &BlochGenerator, v0: BlochVector, t: f64, engine: Engine) -> Result<BlochVector> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Contract(format!("propagation time must be >= 0, got {t}")));
    }
    let v = Vector3::new(v0.vx, v0.vy, v0.vz);
    let out = match engine {
        Engine::MatrixExponential => expm(&(gen.matrix * t)) * v,
        Engine::Adaptive => integrate(&gen.matrix, v, t, &Rk45Options::default())?,
    };
    Ok(BlochVector::new(out[0], out[1], out[2]))
}

/// `Tr[M rho]` for the measurement whose `+1` state has polar angle
/// `theta_m` in the xz-plane: `p = vx sin(theta_m) + vz cos(theta_m)`.
pub fn trace_from_state(v: BlochVector, theta_m: f64) -> f64 {
    let (s, c) = theta_m.sin_cos();
    s * v.vx + c * v.vz
}

/// Cyclic relabelling that puts the x (or y) axis on z.
fn to_frame(kind: ModelKind, v: Vector3<f64>) -> Vector3<f64> {
    match kind {
        ModelKind::M1x => Vector3::new(v[1], v[2], v[0]),
        ModelKind::M1y => Vector3::new(v[2], v[0], v[1]),
        _ => v,
    }
}

fn from_frame(kind: ModelKind, m: Vector3<f64>) -> Vector3<f64> {
    match kind {
        ModelKind::M1x => Vector3::new(m[2], m[0], m[1]),
        ModelKind::M1y => Vector3::new(m[1], m[2], m[0]),
        _ => m,
    }
}

/// Generator of a model variant, in that model's working frame
/// (the sigma_z frame for `M1z`, `M2`, `M3`; the rotated frame for `M1x`, `M1y`).
pub fn model_generator(kind: ModelKind, params: ModelParams) -> BlochGenerator {
    let (w, g) = (params.omega(), params.gamma());
    let r = match kind {
        ModelKind::M1z | ModelKind::M1x | ModelKind::M1y => build_generator(0.0, 0.0, w, g),
        ModelKind::M2 => build_generator(w, 0.0, 0.0, g),
        ModelKind::M3 => build_generator(0.0, w, 0.0, g),
    };
    r.expect("ModelParams is validated")
}

/// State at time `t` obtained by numerical propagation, in the sigma_z frame.
pub fn oracle_state(
    kind: ModelKind,
    params: ModelParams,
    theta_i: f64,
    t: f64,
    engine: Engine,
) -> Result<BlochVector> {
    let gen = model_generator(kind, params);
    let v0 = BlochVector::from_preparation_angle(theta_i);
    let m0 = to_frame(kind, Vector3::new(v0.vx, v0.vy, v0.vz));
    let m = propagate(&gen, BlochVector::new(m0[0], m0[1], m0[2]), t, engine)?;
    let v = from_frame(kind, Vector3::new(m.vx, m.vy, m.vz));
    Ok(BlochVector::new(v[0], v[1], v[2]))
}

/// Measurement trace obtained by numerical propagation.
pub fn oracle_trace(
    kind: ModelKind,
    params: ModelParams,
    geom: ExperimentGeometry,
    t: f64,
    engine: Engine,
) -> Result<f64> {
    let v = oracle_state(kind, params, geom.theta_i(), t, engine)?;
    Ok(trace_from_state(v, geom.theta_m()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, PI};

    #[test]
    fn generator_layout() {
        let g = build_generator(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(*g.matrix(), Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 0.0)));

        let g = build_generator(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(*g.matrix(), Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0));
        assert_eq!(g.matrix().transpose(), -g.matrix());

        let g = build_generator(1.0, 2.0, 3.0, 0.5).unwrap();
        let sym = g.matrix() + g.matrix().transpose();
        assert_eq!(sym, Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 0.0)));
        assert_eq!(g.matrix()[(0, 1)], -3.0);
        assert_eq!(g.matrix()[(0, 2)], -2.0);
        assert_eq!(g.matrix()[(1, 2)], -1.0);

        assert!(build_generator(0.0, 0.0, 0.0, -1e-3).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let g = build_generator(0.3, -1.2, 2.0, 0.8).unwrap();
        let v0 = BlochVector::new(0.3, -0.2, 0.5);
        for engine in [Engine::MatrixExponential, Engine::Adaptive] {
            assert_eq!(propagate(&g, v0, 0.0, engine).unwrap(), v0);
        }
        assert!(propagate(&g, v0, -1.0, Engine::Adaptive).is_err());
    }

    #[test]
    fn half_turn_about_z() {
        let g = build_generator(0.0, 0.0, PI, 0.0).unwrap();
        for engine in [Engine::MatrixExponential, Engine::Adaptive] {
            let v = propagate(&g, BlochVector::new(1.0, 0.0, 0.0), 1.0, engine).unwrap();
            assert_abs_diff_eq!(v.vx, -1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(v.vy, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(v.vz, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn reproduces_m2_ingredients() {
        let pr = ModelParams::new(2.0, 0.5).unwrap();
        let ti = PI / 5.0;
        let v = oracle_state(ModelKind::M2, pr, ti, 1.3, Engine::MatrixExponential).unwrap();
        assert_abs_diff_eq!(v.vx, (-0.5f64 * 1.3).exp() * ti.sin(), epsilon = 1e-8);
        assert_abs_diff_eq!(v.vy, crate::model::phi_x2(pr, 1.3) * ti.cos(), epsilon = 1e-8);
        assert_abs_diff_eq!(v.vz, crate::model::phi_x3(pr, 1.3) * ti.cos(), epsilon = 1e-8);
    }

    #[test]
    fn measurement_projection() {
        assert_eq!(trace_from_state(BlochVector::new(0.0, 0.0, 1.0), 0.0), 1.0);
        assert_abs_diff_eq!(trace_from_state(BlochVector::new(1.0, 0.0, 0.0), PI / 2.0), 1.0, epsilon = 1e-16);
        let v = BlochVector::new(0.3, 0.4, 0.5);
        let expected = lindblad::measure(&lindblad::density_matrix(v), FRAC_PI_3);
        assert_abs_diff_eq!(trace_from_state(v, FRAC_PI_3), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.509_807_621_135_331_6, epsilon = 1e-14);
    }

    #[test]
    fn engines_agree() {
        let g = build_generator(1.7, -0.4, 2.2, 0.9).unwrap();
        let v0 = BlochVector::new(0.6, -0.3, 0.7);
        for &t in &[0.1, 1.0, 4.0, 10.0] {
            let a = propagate(&g, v0, t, Engine::MatrixExponential).unwrap();
            let b = propagate(&g, v0, t, Engine::Adaptive).unwrap();
            for (x, y) in a.to_array().iter().zip(b.to_array()) {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn undamped_propagation_is_orthogonal(
            wx in -5.0f64..5.0, wy in -5.0f64..5.0, wz in -5.0f64..5.0, t in 0.0f64..10.0,
        ) {
            let g = build_generator(wx, wy, wz, 0.0).unwrap();
            let u = expm(&(g.matrix() * t));
            let err = (u.transpose() * u - Matrix3::identity()).abs().max();
            prop_assert!(err < 1e-10, "orthogonality defect {}", err);
        }

        #[test]
        fn semigroup(
            wx in -3.0f64..3.0, wy in -3.0f64..3.0, wz in -3.0f64..3.0, gamma in 0.0f64..3.0,
            t1 in 0.0f64..5.0, t2 in 0.0f64..5.0,
        ) {
            let g = build_generator(wx, wy, wz, gamma).unwrap();
            let v0 = BlochVector::new(0.48, 0.6, -0.64);
            for engine in [Engine::MatrixExponential, Engine::Adaptive] {
                let a = propagate(&g, propagate(&g, v0, t1, engine).unwrap(), t2, engine).unwrap();
                let b = propagate(&g, v0, t1 + t2, engine).unwrap();
                for (x, y) in a.to_array().iter().zip(b.to_array()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn oracle_matches_closed_forms(
            kind in prop::sample::select(ModelKind::ALL.to_vec()),
            omega in -5.0f64..5.0, gamma in 0.0f64..5.0,
            ti in 0.0f64..7.0, tm in 0.0f64..7.0, t in 0.0f64..10.0,
        ) {
            let pr = ModelParams::new(omega, gamma).unwrap();
            let geom = ExperimentGeometry::new(ti, tm).unwrap();
            let o = oracle_trace(kind, pr, geom, t, Engine::MatrixExponential).unwrap();
            let a = crate::model::trace(kind, pr, geom, t);
            prop_assert!((o - a).abs() < 1e-8, "{}: oracle {} analytic {}", kind, o, a);
        }
    }
}
