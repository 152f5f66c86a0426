use super::EigenPair;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Debug, Clone)]
pub struct InitialGuess {
    pub coarse_n: usize,
    pub fine_vector: Vec<f64>,
    /// `1 - 1/N0²`, the leading-order form of `|α_f|²`.
    pub predicted_overlap: f64,
}

/// Fourier zero-padding from an `N0^D` grid to an `N^D` grid, one axis at a
/// time, then renormalization. The Nyquist coefficient is split evenly
/// between `±N0/2` so real input stays real.
pub fn prolong_state(
    coarse: &EigenPair,
    coarse_n: usize,
    fine_n: usize,
    dimension: usize,
) -> Result<InitialGuess> {
    let bad = || Error::IncompatibleGrids {
        coarse: coarse_n,
        fine: fine_n,
    };
    if !coarse_n.is_power_of_two() || !fine_n.is_power_of_two() || coarse_n > fine_n || coarse_n < 2
    {
        return Err(bad());
    }
    let expected = coarse_n.pow(dimension as u32);
    if coarse.vector.len() != expected {
        return Err(Error::Dimension {
            expected,
            got: coarse.vector.len(),
        });
    }

    let mut data: Vec<Complex64> = coarse
        .vector
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    if coarse_n != fine_n {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(coarse_n);
        let inv = planner.plan_fft_inverse(fine_n);
        let mut shape = vec![coarse_n; dimension];
        for axis in 0..dimension {
            data = pad_axis(&data, &shape, axis, fine_n, fwd.as_ref(), inv.as_ref());
            shape[axis] = fine_n;
        }
    }
    let mut fine: Vec<f64> = data.iter().map(|z| z.re).collect();
    let norm = fine.iter().map(|x| x * x).sum::<f64>().sqrt();
    fine.iter_mut().for_each(|x| *x /= norm);
    Ok(InitialGuess {
        coarse_n,
        fine_vector: fine,
        predicted_overlap: 1.0 - 1.0 / (coarse_n * coarse_n) as f64,
    })
}

fn pad_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    fine_n: usize,
    fwd: &dyn rustfft::Fft<f64>,
    inv: &dyn rustfft::Fft<f64>,
) -> Vec<Complex64> {
    let n0 = shape[axis];
    // Axis 0 is the slowest index.
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * fine_n * inner];
    let mut line = vec![Complex64::new(0.0, 0.0); n0];
    let mut wide = vec![Complex64::new(0.0, 0.0); fine_n];
    let half = n0 / 2;
    for o in 0..outer {
        for i in 0..inner {
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[(o * n0 + k) * inner + i];
            }
            fwd.process(&mut line);
            wide.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            wide[..half].copy_from_slice(&line[..half]);
            for k in half + 1..n0 {
                wide[fine_n - n0 + k] = line[k];
            }
            wide[half] = line[half] / 2.0;
            wide[fine_n - half] = line[half] / 2.0;
            inv.process(&mut wide);
            for (k, z) in wide.iter().enumerate() {
                out[(o * fine_n + k) * inner + i] = *z;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, OperatorSpec1D};
    use crate::solver::dense::eig_dense;

    fn pair(vector: Vec<f64>) -> EigenPair {
        EigenPair {
            value: 0.0,
            vector,
            index_f: 0,
        }
    }

    #[test]
    fn same_grid_is_identity() {
        let v = vec![0.5, -0.5, 0.5, -0.5];
        let g = prolong_state(&pair(v.clone()), 4, 4, 1).unwrap();
        assert_eq!(g.fine_vector, v);
    }

    #[test]
    fn constant_stays_constant() {
        let g = prolong_state(&pair(vec![0.5; 4]), 4, 16, 1).unwrap();
        for x in &g.fine_vector {
            assert!((x - 0.25).abs() < 1e-14);
        }
        let g2 = prolong_state(&pair(vec![0.25; 16]), 4, 8, 2).unwrap();
        assert_eq!(g2.fine_vector.len(), 64);
        for x in &g2.fine_vector {
            assert!((x - 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn band_limited_mode_interpolates_exactly() {
        let n0 = 8;
        let v: Vec<f64> = (0..n0)
            .map(|x| (2.0 * std::f64::consts::PI * x as f64 / n0 as f64).sin())
            .collect();
        let g = prolong_state(&pair(v), n0, 32, 1).unwrap();
        let norm = (16.0f64).sqrt();
        for (x, val) in g.fine_vector.iter().enumerate() {
            let e = (2.0 * std::f64::consts::PI * x as f64 / 32.0).sin() / norm;
            assert!((val - e).abs() < 1e-13);
        }
    }

    #[test]
    fn variable_coefficient_ground_state_overlap() {
        let a = CoefficientFn::fourier(2.0, &[(1.0, 0.0)]).unwrap();
        let spec = OperatorSpec1D::new(vec![CoefficientFn::constant(1.0), a]).unwrap();
        let coarse = &eig_dense(&build_operator_1d(&spec, 8).unwrap()).unwrap()[0];
        let fine = &eig_dense(&build_operator_1d(&spec, 32).unwrap()).unwrap()[0];
        let g = prolong_state(coarse, 8, 32, 1).unwrap();
        let o: f64 = g
            .fine_vector
            .iter()
            .zip(&fine.vector)
            .map(|(a, b)| a * b)
            .sum();
        assert!(o * o >= 0.99, "|alpha|^2 = {}", o * o);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(prolong_state(&pair(vec![1.0; 8]), 8, 4, 1).is_err());
        assert!(prolong_state(&pair(vec![1.0; 6]), 6, 12, 1).is_err());
        assert!(prolong_state(&pair(vec![1.0; 4]), 8, 16, 1).is_err());
    }
}
