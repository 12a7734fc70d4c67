//! Density-matrix integration of the master equation
//! `drho/dt = -i[H, rho] + V rho V - (V V rho + rho V V)/2`
//! with Hermitian `H = (omega/2) n.sigma` and `V = sqrt(gamma/2) d.sigma`.
//!
//! Works directly with 2x2 complex matrices and fixed-step RK4, sharing no
//! code with the Bloch-vector solvers.

use num_complex::Complex64 as C64;

use crate::model::{BlochVector, ExperimentGeometry, ModelKind, ModelParams};

pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn pauli(axis: [f64; 3]) -> Mat2 {
    let [x, y, z] = axis;
    [
        [C64::new(z, 0.0), C64::new(x, -y)],
        [C64::new(x, y), C64::new(-z, 0.0)],
    ]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn axpy(alpha: C64, x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = *y;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += alpha * x[i][j];
        }
    }
    out
}

fn scale(alpha: C64, x: &Mat2) -> Mat2 {
    axpy(alpha, x, &[[ZERO; 2]; 2])
}

/// Hamiltonian and jump operator of one model.
#[derive(Debug, Clone, Copy)]
pub struct LindbladModel {
    hamiltonian: Mat2,
    jump: Mat2,
    rate_bound: f64,
}

impl LindbladModel {
    /// `H = (omega/2) n.sigma`, `V = sqrt(gamma/2) d.sigma` for unit axes `n`, `d`.
    pub fn from_axes(omega: f64, h_axis: [f64; 3], gamma: f64, v_axis: [f64; 3]) -> Self {
        let hamiltonian = scale(C64::new(0.5 * omega, 0.0), &pauli(h_axis));
        let jump = scale(C64::new((0.5 * gamma).sqrt(), 0.0), &pauli(v_axis));
        Self {
            hamiltonian,
            jump,
            rate_bound: omega.abs() + 2.0 * gamma,
        }
    }

    /// The physical operators behind each model variant. `M3` uses
    /// `H = -(omega/2) sigma_y` and `M1y` uses `H = +(omega/2) sigma_y`, the
    /// orientations that reproduce the respective trace formulas.
    pub fn new(kind: ModelKind, params: ModelParams) -> Self {
        const X: [f64; 3] = [1.0, 0.0, 0.0];
        const Y: [f64; 3] = [0.0, 1.0, 0.0];
        const Z: [f64; 3] = [0.0, 0.0, 1.0];
        let (w, g) = (params.omega(), params.gamma());
        match kind {
            ModelKind::M1z => Self::from_axes(w, Z, g, Z),
            ModelKind::M1x => Self::from_axes(w, X, g, X),
            ModelKind::M1y => Self::from_axes(w, Y, g, Y),
            ModelKind::M2 => Self::from_axes(w, X, g, Z),
            ModelKind::M3 => Self::from_axes(-w, Y, g, Z),
        }
    }

    fn rhs(&self, rho: &Mat2) -> Mat2 {
        let h = &self.hamiltonian;
        let v = &self.jump;
        let comm = axpy(-ONE, &mul(rho, h), &mul(h, rho));
        let vv = mul(v, v);
        let diss = axpy(
            C64::new(-0.5, 0.0),
            &axpy(ONE, &mul(rho, &vv), &mul(&vv, rho)),
            &mul(&mul(v, rho), v),
        );
        axpy(-I, &comm, &diss)
    }

    /// Fixed-step RK4 from 0 to `t`.
    pub fn evolve(&self, rho0: &Mat2, t: f64) -> Mat2 {
        let steps = ((t * (self.rate_bound + 1.0)) / 2e-3).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let half = C64::new(0.5 * h, 0.0);
        let full = C64::new(h, 0.0);
        let sixth = C64::new(h / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        let mut rho = *rho0;
        for _ in 0..steps {
            let k1 = self.rhs(&rho);
            let k2 = self.rhs(&axpy(half, &k1, &rho));
            let k3 = self.rhs(&axpy(half, &k2, &rho));
            let k4 = self.rhs(&axpy(full, &k3, &rho));
            let sum = axpy(ONE, &k4, &axpy(two, &k3, &axpy(two, &k2, &k1)));
            rho = axpy(sixth, &sum, &rho);
        }
        rho
    }
}

/// `rho = (I + v.sigma) / 2`.
pub fn density_matrix(v: BlochVector) -> Mat2 {
    let s = pauli([v.vx, v.vy, v.vz]);
    let mut rho = scale(C64::new(0.5, 0.0), &s);
    rho[0][0] += 0.5;
    rho[1][1] += 0.5;
    rho
}

/// `Tr[M rho]` with `M = |m+><m+| - |m-><m-|` built from the measurement kets.
pub fn measure(rho: &Mat2, theta_m: f64) -> f64 {
    let (s, c) = (0.5 * theta_m).sin_cos();
    let plus = [C64::new(c, 0.0), C64::new(s, 0.0)];
    let minus = [C64::new(s, 0.0), C64::new(-c, 0.0)];
    let expect = |k: &[C64; 2]| -> f64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += k[i].conj() * rho[i][j] * k[j];
            }
        }
        acc.re
    };
    expect(&plus) - expect(&minus)
}

/// Density matrix of `cos(theta/2)|0> + sin(theta/2)|1>`, built from the ket.
pub fn prepared_state(theta_i: f64) -> Mat2 {
    let (s, c) = (0.5 * theta_i).sin_cos();
    [
        [C64::new(c * c, 0.0), C64::new(c * s, 0.0)],
        [C64::new(s * c, 0.0), C64::new(s * s, 0.0)],
    ]
}

/// Measurement trace of `model` at time `t`.
pub fn lindblad_trace(model: LindbladModel, geom: ExperimentGeometry, t: f64) -> f64 {
    let rho = model.evolve(&prepared_state(geom.theta_i()), t);
    measure(&rho, geom.theta_m())
}

/// Bloch vector `v_a = Tr(rho sigma_a)`.
pub fn bloch_vector(rho: &Mat2) -> BlochVector {
    BlochVector::new(
        2.0 * rho[0][1].re,
        -2.0 * rho[0][1].im,
        (rho[0][0] - rho[1][1]).re,
    )
}
