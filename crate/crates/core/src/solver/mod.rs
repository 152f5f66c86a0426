//! Reference eigensolvers and initial-state preparation.

mod banded;
pub mod dense;
pub mod krylov;
pub mod prolong;

pub use banded::ShiftedSolver;
pub use dense::{eig_dense, MAX_DENSE_SIDE};
pub use krylov::{eig_lowest_krylov, eig_lowest_krylov_with, KrylovOptions, KrylovSolution};
pub use prolong::{prolong_state, InitialGuess};

use crate::error::{Error, Result};
use crate::operator::DiscretizedOperator;
use crate::registry::Registry;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub index_f: usize,
}

const NORM_TOL: f64 = 1e-10;

fn check_unit(v: &[f64]) -> Result<()> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// `vᵀ L v` for a unit vector `v`.
pub fn rayleigh_quotient(op: &DiscretizedOperator, v: &[f64]) -> Result<f64> {
    if v.len() != op.side() {
        return Err(Error::Dimension {
            expected: op.side(),
            got: v.len(),
        });
    }
    check_unit(v)?;
    Ok(v.iter().zip(op.apply(v)).map(|(a, b)| a * b).sum())
}

/// `⟨a|b⟩` with `a` conjugated.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    for v in [a, b] {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

/// Real-vector convenience wrapper around [`overlap`].
pub fn overlap_real(a: &[f64], b: &[f64]) -> Result<f64> {
    let lift = |v: &[f64]| {
        v.iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>()
    };
    overlap(&lift(a), &lift(b)).map(|z| z.re)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveRequest {
    pub index_f: usize,
    /// Required by shift-invert solvers.
    pub shift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub pair: EigenPair,
    pub shift_used: Option<f64>,
    pub shift_perturbed: bool,
    pub ops: Option<u64>,
}

pub trait Eigensolver: Send + Sync {
    fn solve(&self, op: &DiscretizedOperator, request: &SolveRequest) -> Result<SolveOutcome>;
}

struct DenseSolver;

impl Eigensolver for DenseSolver {
    fn solve(&self, op: &DiscretizedOperator, request: &SolveRequest) -> Result<SolveOutcome> {
        let mut pairs = eig_dense(op)?;
        if request.index_f >= pairs.len() {
            return Err(Error::Spec(format!(
                "eigen index {} out of range for {} retained points",
                request.index_f,
                pairs.len()
            )));
        }
        Ok(SolveOutcome {
            pair: pairs.swap_remove(request.index_f),
            shift_used: None,
            shift_perturbed: false,
            ops: None,
        })
    }
}

struct KrylovSolver;

impl Eigensolver for KrylovSolver {
    fn solve(&self, op: &DiscretizedOperator, request: &SolveRequest) -> Result<SolveOutcome> {
        let mu = request
            .shift
            .ok_or_else(|| Error::Spec("the krylov solver needs a shift".into()))?;
        let sol = eig_lowest_krylov(op, request.index_f, mu)?;
        Ok(SolveOutcome {
            pair: sol.pair,
            shift_used: Some(sol.shift_used),
            shift_perturbed: sol.shift_perturbed,
            ops: Some(sol.ops),
        })
    }
}

/// `dense` and `krylov`.
pub fn eigensolvers() -> Registry<dyn Eigensolver> {
    let mut r: Registry<dyn Eigensolver> = Registry::new("eigensolver");
    r.register("dense", Arc::new(DenseSolver));
    r.register("krylov", Arc::new(KrylovSolver));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, OperatorSpec1D};

    fn laplacian(n: usize) -> DiscretizedOperator {
        let spec = OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap();
        build_operator_1d(&spec, n).unwrap()
    }

    #[test]
    fn rayleigh_quotient_cases() {
        let op = laplacian(8);
        let pairs = eig_dense(&op).unwrap();
        assert!((rayleigh_quotient(&op, &pairs[3].vector).unwrap() - pairs[3].value).abs() < 1e-9);
        let c = vec![1.0 / 8f64.sqrt(); 8];
        assert!(rayleigh_quotient(&op, &c).unwrap().abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mix: Vec<f64> = pairs[1]
            .vector
            .iter()
            .zip(&pairs[5].vector)
            .map(|(a, b)| s * (a + b))
            .collect();
        let expect = 0.5 * (pairs[1].value + pairs[5].value);
        assert!((rayleigh_quotient(&op, &mix).unwrap() - expect).abs() < 1e-9);
        assert!(matches!(
            rayleigh_quotient(&op, &[1.0; 8]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn overlap_cases() {
        let op = laplacian(8);
        let pairs = eig_dense(&op).unwrap();
        let a = &pairs[2].vector;
        assert!((overlap_real(a, a).unwrap() - 1.0).abs() < 1e-12);
        assert!(overlap_real(a, &pairs[4].vector).unwrap().abs() < 1e-12);
        assert!(overlap_real(a, &a[..4]).is_err());
        let i = Complex64::new(0.0, 1.0);
        let u = vec![i * 0.6, Complex64::new(0.8, 0.0)];
        let w = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!((overlap(&u, &w).unwrap() - (-i * 0.6)).norm() < 1e-15);
    }

    #[test]
    fn registry_selects_by_name() {
        let op = laplacian(16);
        let reg = eigensolvers();
        assert_eq!(reg.names(), vec!["dense", "krylov"]);
        let d = reg
            .get("dense")
            .unwrap()
            .solve(
                &op,
                &SolveRequest {
                    index_f: 1,
                    shift: None,
                },
            )
            .unwrap();
        let k = reg
            .get("krylov")
            .unwrap()
            .solve(
                &op,
                &SolveRequest {
                    index_f: 1,
                    shift: Some(30.0),
                },
            )
            .unwrap();
        assert!((d.pair.value - k.pair.value).abs() < 1e-9 * d.pair.value);
        assert!(reg
            .get("krylov")
            .unwrap()
            .solve(&op, &SolveRequest::default())
            .is_err());
        assert!(reg.get("arnoldi").is_err());
    }
}
