use nalgebra::Matrix3;

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2; 24 terms
/// then bound the truncation error far below double precision.
pub fn expm(a: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let x = a / 2f64.powi(squarings as i32);

    let mut result = Matrix3::identity();
    let mut term = Matrix3::identity();
    for k in 1..=24 {
        term = term * x / k as f64;
        result += term;
        if term.abs().max() < 1e-18 * result.abs().max() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let a = Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, 2.0, 0.0));
        let e = expm(&a);
        assert!((e[(0, 0)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - 2.0f64.exp()).abs() < 1e-14);
        assert_eq!(e[(2, 2)], 1.0);
    }

    #[test]
    fn agrees_with_nalgebra() {
        let a = Matrix3::new(-0.7, -3.1, 2.2, 3.1, -0.7, -1.4, -2.2, 1.4, 0.0) * 2.5;
        let ours = expm(&a);
        let theirs = a.exp();
        assert!((ours - theirs).abs().max() < 1e-11);
    }
}
