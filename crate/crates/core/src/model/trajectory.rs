use super::kernels::{damped_kernels, phi_x2, phi_x3, phi_y1, phi_y3};
use super::{BlochVector, ModelKind, ModelParams};

/// Coordinates in which the shared Hamiltonian/dephasing axis of the `M1x`
/// and `M1y` models becomes the z-axis. Both maps are cyclic permutations,
/// hence proper rotations.
#[derive(Clone, Copy)]
enum Frame {
    /// model axes (x', y', z') = lab (y, z, x)
    XAxis,
    /// model axes (x', y', z') = lab (z, x, y)
    YAxis,
}

impl Frame {
    fn to_model(self, v: BlochVector) -> [f64; 3] {
        match self {
            Frame::XAxis => [v.vy, v.vz, v.vx],
            Frame::YAxis => [v.vz, v.vx, v.vy],
        }
    }

    fn to_lab(self, m: [f64; 3]) -> BlochVector {
        match self {
            Frame::XAxis => BlochVector::new(m[2], m[0], m[1]),
            Frame::YAxis => BlochVector::new(m[1], m[2], m[0]),
        }
    }
}

/// Rotation about z at rate `omega` with transverse decay at rate `gamma`,
/// from an arbitrary initial vector.
fn commuting_solution(params: ModelParams, v0: [f64; 3], t: f64) -> [f64; 3] {
    let e = (-params.gamma() * t).exp();
    let (sn, cs) = (params.omega() * t).sin_cos();
    [
        e * (cs * v0[0] - sn * v0[1]),
        e * (sn * v0[0] + cs * v0[1]),
        v0[2],
    ]
}

/// Exact Bloch vector at time `t >= 0` for the pure state prepared at angle
/// `theta_i`, expressed in the sigma_z frame for every model.
pub fn bloch_trajectory(kind: ModelKind, params: ModelParams, theta_i: f64, t: f64) -> BlochVector {
    debug_assert!(t >= 0.0, "negative time {t}");
    let v0 = BlochVector::from_preparation_angle(theta_i);
    let (si, ci) = (v0.vx, v0.vz);
    match kind {
        ModelKind::M1z => BlochVector::from_array(commuting_solution(params, v0.to_array(), t)),
        ModelKind::M1x => {
            let f = Frame::XAxis;
            f.to_lab(commuting_solution(params, f.to_model(v0), t))
        }
        ModelKind::M1y => {
            let f = Frame::YAxis;
            f.to_lab(commuting_solution(params, f.to_model(v0), t))
        }
        ModelKind::M2 => BlochVector::new(
            (-params.gamma() * t).exp() * si,
            phi_x2(params, t) * ci,
            phi_x3(params, t) * ci,
        ),
        ModelKind::M3 => {
            let ws = params.omega() * damped_kernels(params, t).s;
            BlochVector::new(
                phi_y1(params, t) * si - ws * ci,
                0.0,
                phi_y3(params, t) * ci + ws * si,
            )
        }
    }
}
