use super::{check_grid, OperatorSpec1D};
use crate::error::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Dense reciprocal-space matrix over `k, k' ∈ {-N/2, .., N/2 - 1}` (rows and
/// columns in ascending `k`):
///
/// `L̃_{k,k'} = Σ_s conj(2πik)^s · ã_{s,k-k'} · (2πik')^s`
///
/// The left factor is conjugated so the matrix is the Fourier image of the
/// bilinear form, which keeps it Hermitian and positive semidefinite for
/// nonnegative coefficients.
pub fn reciprocal_matrix(spec: &OperatorSpec1D, n: usize) -> Result<DMatrix<Complex64>> {
    check_grid(n)?;
    let half = (n / 2) as i64;
    let ks: Vec<i64> = (-half..half).collect();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (s, coeff) in spec.coefficients().iter().enumerate() {
        for (r, &k) in ks.iter().enumerate() {
            let left = Complex64::new(0.0, 2.0 * PI * k as f64)
                .powu(s as u32)
                .conj();
            for (c, &kp) in ks.iter().enumerate() {
                let a = coeff.fourier_coefficient(k - kp);
                if a.norm() == 0.0 {
                    continue;
                }
                let right = Complex64::new(0.0, 2.0 * PI * kp as f64).powu(s as u32);
                m[(r, c)] += left * a * right;
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::CoefficientFn;

    #[test]
    fn multiplication_by_one_is_identity() {
        let m = reciprocal_matrix(&OperatorSpec1D::identity(), 8).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((m[(r, c)] - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_second_order_is_diagonal_plane_wave_energy() {
        let spec = OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap();
        let m = reciprocal_matrix(&spec, 8).unwrap();
        for (r, k) in (-4i64..4).enumerate() {
            for c in 0..8 {
                let e = if r == c {
                    (2.0 * PI * k as f64).powi(2)
                } else {
                    0.0
                };
                assert!((m[(r, c)] - Complex64::new(e, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn variable_coefficient_matrix_is_hermitian() {
        let a = CoefficientFn::fourier(2.0, &[(1.0, 0.3)]).unwrap();
        let spec = OperatorSpec1D::new(vec![CoefficientFn::constant(0.5), a]).unwrap();
        let m = reciprocal_matrix(&spec, 16).unwrap();
        let diff = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
        // Off-diagonal coupling from the cos harmonic is present.
        assert!(m[(9, 10)].norm() > 0.0);
    }
}
