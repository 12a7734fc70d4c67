//! Adaptive Dormand–Prince 5(4) integration of `dv/dt = A v`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Rk45Options {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step relative to `max(1, t)` before giving up.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from 0 to `t_end`, returning the state at `t_end`.
pub fn integrate(a: &Matrix3<f64>, v0: Vector3<f64>, t_end: f64, opts: &Rk45Options) -> Result<Vector3<f64>> {
    if t_end == 0.0 {
        return Ok(v0);
    }
    let rhs = |v: &Vector3<f64>| a * v;
    let norm = a.abs().max().max(1e-12);
    let mut h = (0.01 / norm).min(t_end);
    let h_min = opts.min_step * t_end.max(1.0);
    let mut t = 0.0;
    let mut v = v0;
    // the FSAL stage of the previous step is the first stage of the next
    let mut k0 = rhs(&v);

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(v);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let mut k = [Vector3::zeros(); 7];
        k[0] = k0;
        for s in 1..7 {
            let mut acc = v;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += kj * (h * A[s][j]);
            }
            k[s] = rhs(&acc);
        }
        let mut v5 = v;
        let mut v4 = v;
        for s in 0..7 {
            v5 += k[s] * (h * B5[s]);
            v4 += k[s] * (h * B4[s]);
        }
        let err = (0..3)
            .map(|i| {
                let scale = opts.atol + opts.rtol * v[i].abs().max(v5[i].abs());
                ((v5[i] - v4[i]) / scale).abs()
            })
            .fold(0.0, f64::max);

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            v = v5;
            k0 = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < h_min && t < t_end {
            return Err(Error::NumericalFailure(format!(
                "step size underflow at t = {t} (h = {h:e})"
            )));
        }
    }
    Err(Error::NumericalFailure(format!(
        "exceeded {} integration steps",
        opts.max_steps
    )))
}
