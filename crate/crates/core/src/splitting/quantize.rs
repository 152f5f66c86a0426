use super::SplitPlan;
use crate::error::{Error, Result};
use serde::Serialize;

/// Fixed-point coefficients: `bits` magnitude bits at `resolution`, in units
/// of the plan scale `N^{2S}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantization {
    pub bits: u32,
    pub resolution: f64,
}

pub const DEFAULT_BITS: u32 = 16;

impl Quantization {
    pub fn new(bits: u32, resolution: f64) -> Result<Self> {
        if !(1..=52).contains(&bits) || !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Spec(format!(
                "quantization needs 1..=52 bits and a positive resolution, got {bits} bits at {resolution}"
            )));
        }
        Ok(Self { bits, resolution })
    }

    /// Nearest representable value, or an overflow error.
    pub fn quantize(&self, value: f64) -> Result<f64> {
        let q = (value / self.resolution).round();
        if q.abs() > ((1u64 << self.bits) - 1) as f64 {
            return Err(Error::Quantization {
                value,
                bits: self.bits,
                resolution: self.resolution,
            });
        }
        Ok(q * self.resolution)
    }
}

impl SplitPlan {
    /// Same parts with every coefficient rounded to the fixed-point grid.
    pub fn quantized(&self, q: &Quantization) -> Result<SplitPlan> {
        let scale = self.scale;
        let parts = self
            .parts
            .iter()
            .map(|p| p.map_values(|v| Ok(scale * q.quantize(v / scale)?)))
            .collect::<Result<_>>()?;
        Ok(SplitPlan {
            parts,
            ..self.clone()
        })
    }
}

/// Upper bound on the eigenvalue shift from rounding: every entry moves by at
/// most `scale · δ/2`, so the perturbation norm is at most its row count times
/// that.
pub fn quantization_error_bound(plan: &SplitPlan, q: &Quantization) -> f64 {
    plan.reconstruct().max_row_nnz() as f64 * plan.scale * q.resolution / 2.0
}

/// Coarsest power-of-two resolution whose bound stays below a tenth of the
/// given truncation error, checked for overflow at `bits`.
pub fn choose_resolution(
    plan: &SplitPlan,
    truncation_error: f64,
    bits: u32,
) -> Result<Quantization> {
    let rows = plan.reconstruct().max_row_nnz().max(1) as f64;
    let target = 0.1 * truncation_error / (rows * plan.scale / 2.0);
    let resolution = 2f64.powi(target.log2().floor() as i32);
    let q = Quantization::new(bits, resolution)?;
    plan.quantized(&q)?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, OperatorSpec1D};
    use crate::solver::eig_dense;
    use crate::splitting::{split_operator, splitting_error, UnitaryStep};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn rounding_and_overflow() {
        let q = Quantization::new(3, 0.25).unwrap();
        assert_eq!(q.quantize(0.6).unwrap(), 0.5);
        assert_eq!(q.quantize(-1.74).unwrap(), -1.75);
        assert!(matches!(q.quantize(2.0), Err(Error::Quantization { .. })));
        assert!(Quantization::new(0, 0.1).is_err());
        assert!(Quantization::new(8, 0.0).is_err());
    }

    #[test]
    fn quantized_spectrum_shift_within_bound() {
        let a = CoefficientFn::fourier(2.0, &[(1.0, 0.3)]).unwrap();
        let op = build_operator_1d(&OperatorSpec1D::single_term(1, a).unwrap(), 8).unwrap();
        let plan = split_operator(&op).unwrap();
        let lambda1 = eig_dense(&op).unwrap()[1].value;
        // Truncation error of the first nonzero eigenvalue at N = 8 is O(λ/N²).
        let trunc = lambda1 * (PI / 8.0).powi(2) / 3.0;
        let q = choose_resolution(&plan, trunc, DEFAULT_BITS).unwrap();
        let bound = quantization_error_bound(&plan, &q);
        assert!(bound <= 0.1 * trunc);

        let qp = Arc::new(plan.quantized(&q).unwrap());
        let tau = 1e-4;
        let plain = splitting_error(&UnitaryStep::strang(Arc::new(plan), tau), &op).unwrap();
        let quant = splitting_error(&UnitaryStep::strang(qp, tau), &op).unwrap();
        for (a, b) in plain.pairs.iter().zip(&quant.pairs) {
            assert!(
                (a.split - b.split).abs() <= bound * (1.0 + 1e-6) + 1e-9,
                "f = {}",
                a.index_f
            );
        }
    }

    #[test]
    fn too_few_bits_overflow() {
        let op = build_operator_1d(
            &OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap(),
            8,
        )
        .unwrap();
        let plan = split_operator(&op).unwrap();
        assert!(choose_resolution(&plan, 1e-6, 4).is_err());
    }
}
