//! Closed-form coefficient families `a_s(x)` on the periodic unit interval.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples used to estimate Fourier coefficients of non-trigonometric kinds.
const QUADRATURE_POINTS: usize = 4096;
/// Periodicity tolerance for polynomial coefficients at x = 0 and x = 1.
const PERIODICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    /// `params = [c]`.
    Constant,
    /// `params = [c0, a1, b1, a2, b2, ...]` for `c0 + Σ a_k cos(2πkx) + b_k sin(2πkx)`.
    FourierSeries,
    /// `params = [p0, p1, ...]` for `Σ p_j x^j`.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Inverse DFT of the Fourier series truncated to `|k| <= N/2`.
    #[default]
    Spectral,
    /// Direct evaluation at `x̄ / N`.
    Pointwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFn {
    kind: CoefficientKind,
    params: Vec<f64>,
    smoothness_order: u32,
}

impl CoefficientFn {
    pub fn new(kind: CoefficientKind, params: Vec<f64>, smoothness_order: u32) -> Result<Self> {
        let c = Self {
            kind,
            params,
            smoothness_order,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(CoefficientKind::Constant, vec![value], u32::MAX).expect("finite constant")
    }

    /// `c0 + Σ_k (a_k cos 2πkx + b_k sin 2πkx)` with `harmonics[k-1] = (a_k, b_k)`.
    pub fn fourier(c0: f64, harmonics: &[(f64, f64)]) -> Result<Self> {
        let mut params = vec![c0];
        for &(a, b) in harmonics {
            params.push(a);
            params.push(b);
        }
        Self::new(CoefficientKind::FourierSeries, params, u32::MAX)
    }

    pub fn polynomial(coeffs: Vec<f64>, smoothness_order: u32) -> Result<Self> {
        Self::new(CoefficientKind::Polynomial, coeffs, smoothness_order)
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    fn validate(&self) -> Result<()> {
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Coefficient("parameters must be finite".into()));
        }
        match self.kind {
            CoefficientKind::Constant if self.params.len() != 1 => Err(Error::Coefficient(
                "constant takes exactly one parameter".into(),
            )),
            CoefficientKind::FourierSeries if self.params.len().is_multiple_of(2) => Err(
                Error::Coefficient("fourier-series takes [c0, a1, b1, ...] (odd length)".into()),
            ),
            CoefficientKind::Polynomial if self.params.is_empty() => Err(Error::Coefficient(
                "polynomial needs at least one term".into(),
            )),
            CoefficientKind::Polynomial => self.check_polynomial_periodicity(),
            _ => Ok(()),
        }
    }

    fn check_polynomial_periodicity(&self) -> Result<()> {
        let degree = self.params.len() - 1;
        let top = (self.smoothness_order as usize).min(degree);
        for t in 0..=top {
            let at0 = poly_derivative(&self.params, t, 0.0);
            let at1 = poly_derivative(&self.params, t, 1.0);
            if (at0 - at1).abs() > PERIODICITY_TOL * at0.abs().max(at1.abs()).max(1.0) {
                return Err(Error::Coefficient(format!(
                    "polynomial derivative of order {t} is not periodic: {at0} at x=0 vs {at1} at x=1"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            CoefficientKind::Constant => self.params[0],
            CoefficientKind::FourierSeries => {
                let mut v = self.params[0];
                for (k, pair) in self.params[1..].chunks(2).enumerate() {
                    let w = 2.0 * PI * (k + 1) as f64 * x;
                    v += pair[0] * w.cos() + pair[1] * w.sin();
                }
                v
            }
            CoefficientKind::Polynomial => poly_derivative(&self.params, 0, x),
        }
    }

    /// Highest harmonic carried exactly, if the family is band-limited.
    pub fn band_limit(&self) -> Option<usize> {
        match self.kind {
            CoefficientKind::Constant => Some(0),
            CoefficientKind::FourierSeries => Some((self.params.len() - 1) / 2),
            CoefficientKind::Polynomial => (self.params.len() == 1).then_some(0),
        }
    }

    /// Fourier coefficient `ã_k = ∫ e^{-2πikx} a(x) dx`.
    pub fn fourier_coefficient(&self, k: i64) -> Complex64 {
        match self.kind {
            CoefficientKind::Constant => {
                if k == 0 {
                    Complex64::new(self.params[0], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            CoefficientKind::FourierSeries => {
                if k == 0 {
                    return Complex64::new(self.params[0], 0.0);
                }
                let m = k.unsigned_abs() as usize;
                if 2 * m > self.params.len() - 1 {
                    return Complex64::new(0.0, 0.0);
                }
                let (a, b) = (self.params[2 * m - 1], self.params[2 * m]);
                // a cos + b sin = (a - ib)/2 e^{+i..} + (a + ib)/2 e^{-i..}
                if k > 0 {
                    Complex64::new(a / 2.0, -b / 2.0)
                } else {
                    Complex64::new(a / 2.0, b / 2.0)
                }
            }
            CoefficientKind::Polynomial => {
                let p = QUADRATURE_POINTS;
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..p {
                    let x = j as f64 / p as f64;
                    acc += Complex64::from_polar(self.eval(x), -2.0 * PI * k as f64 * x);
                }
                acc / p as f64
            }
        }
    }

    pub fn sample(&self, n: usize, mode: SamplingMode) -> Vec<f64> {
        match (mode, self.kind) {
            (_, CoefficientKind::Constant) => vec![self.params[0]; n],
            (SamplingMode::Pointwise, _) => {
                (0..n).map(|x| self.eval(x as f64 / n as f64)).collect()
            }
            (SamplingMode::Spectral, _) => {
                let half = (n / 2) as i64;
                let coeffs: Vec<(i64, Complex64)> = (-half..=half)
                    .map(|k| (k, self.fourier_coefficient(k)))
                    .filter(|(_, c)| c.norm() > 0.0)
                    .collect();
                (0..n)
                    .map(|x| {
                        coeffs
                            .iter()
                            .map(|&(k, c)| {
                                c * Complex64::from_polar(
                                    1.0,
                                    2.0 * PI * (k * x as i64) as f64 / n as f64,
                                )
                            })
                            .sum::<Complex64>()
                            .re
                    })
                    .collect()
            }
        }
    }
}

/// `t`-th derivative of `Σ p_j x^j` at `x`.
fn poly_derivative(p: &[f64], t: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for j in (t..p.len()).rev() {
        let falling: f64 = ((j - t + 1)..=j).map(|v| v as f64).product();
        acc = acc * x + p[j] * falling;
    }
    acc
}

/// Samples `c` on `n` points; `n` must be a power of two.
pub fn sample_coefficients(c: &CoefficientFn, n: usize, mode: SamplingMode) -> Result<Vec<f64>> {
    crate::operator::check_grid(n)?;
    Ok(c.sample(n, mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_are_constant_in_both_modes() {
        let c = CoefficientFn::constant(3.0);
        for n in [2, 8, 64] {
            assert_eq!(
                sample_coefficients(&c, n, SamplingMode::Spectral).unwrap(),
                vec![3.0; n]
            );
            assert_eq!(
                sample_coefficients(&c, n, SamplingMode::Pointwise).unwrap(),
                vec![3.0; n]
            );
        }
    }

    #[test]
    fn band_limited_cosine_is_unchanged_by_spectral_truncation() {
        let c = CoefficientFn::fourier(0.0, &[(1.0, 0.0)]).unwrap();
        let s = sample_coefficients(&c, 8, SamplingMode::Spectral).unwrap();
        for (x, v) in s.iter().enumerate() {
            assert!((v - (2.0 * PI * x as f64 / 8.0).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn triangle_wave_spectral_and_pointwise_differ_by_the_tail() {
        // Triangle wave: Σ_{k odd} 8/(π² k²) cos(2πkx), truncated at k = 15.
        let harmonics: Vec<(f64, f64)> = (1..=15)
            .map(|k| {
                if k % 2 == 1 {
                    (8.0 / (PI * PI * (k * k) as f64), 0.0)
                } else {
                    (0.0, 0.0)
                }
            })
            .collect();
        let c = CoefficientFn::fourier(0.0, &harmonics).unwrap();
        let spectral = sample_coefficients(&c, 8, SamplingMode::Spectral).unwrap();
        let pointwise = sample_coefficients(&c, 8, SamplingMode::Pointwise).unwrap();
        // |k| <= 4 kept; discarded tail is k = 5..15.
        let tail: f64 = harmonics[4..].iter().map(|(a, b)| a.abs() + b.abs()).sum();
        let mut max_diff: f64 = 0.0;
        for x in 0..8 {
            // Independent reconstruction of the discarded part at this point.
            let discarded: f64 = harmonics[4..]
                .iter()
                .enumerate()
                .map(|(i, (a, _))| a * (2.0 * PI * (i + 5) as f64 * x as f64 / 8.0).cos())
                .sum();
            let d = pointwise[x] - spectral[x];
            assert!((d - discarded).abs() < 1e-14, "x={x}: {d} vs {discarded}");
            max_diff = max_diff.max(d.abs());
        }
        // Attained at x = 0, where every discarded cosine is 1.
        assert!(max_diff > 0.0 && max_diff <= tail * (1.0 + 1e-12));
    }

    #[test]
    fn fourier_coefficients_reproduce_the_series() {
        let c = CoefficientFn::fourier(2.0, &[(1.0, -0.5), (0.25, 0.0)]).unwrap();
        for x in [0.0, 0.1, 0.37, 0.9] {
            let v: Complex64 = (-2..=2)
                .map(|k: i64| {
                    c.fourier_coefficient(k) * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x)
                })
                .sum();
            assert!((v.re - c.eval(x)).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn periodic_polynomial_is_accepted_and_nonperiodic_rejected() {
        // x²(1-x)² = x² - 2x³ + x⁴ has matching value and first derivative at 0 and 1.
        assert!(CoefficientFn::polynomial(vec![0.0, 0.0, 1.0, -2.0, 1.0], 1).is_ok());
        // The second derivative also matches (2 at both ends), the third does not.
        assert!(CoefficientFn::polynomial(vec![0.0, 0.0, 1.0, -2.0, 1.0], 2).is_ok());
        assert!(CoefficientFn::polynomial(vec![0.0, 0.0, 1.0, -2.0, 1.0], 3).is_err());
        assert!(CoefficientFn::polynomial(vec![0.0, 1.0], 0).is_err());
    }

    #[test]
    fn polynomial_derivatives() {
        let p = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(poly_derivative(&p, 0, 2.0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(poly_derivative(&p, 1, 2.0), 2.0 + 12.0 + 48.0);
        assert_eq!(poly_derivative(&p, 3, 5.0), 24.0);
        assert_eq!(poly_derivative(&p, 4, 5.0), 0.0);
    }

    #[test]
    fn invalid_parameter_shapes_are_rejected() {
        assert!(CoefficientFn::new(CoefficientKind::Constant, vec![1.0, 2.0], 0).is_err());
        assert!(CoefficientFn::new(CoefficientKind::FourierSeries, vec![1.0, 2.0], 0).is_err());
        assert!(CoefficientFn::new(CoefficientKind::Constant, vec![f64::NAN], 0).is_err());
    }
}
