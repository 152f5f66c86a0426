//! Continuous operator specifications and their periodic forward-difference
//! discretizations.
//!
//! A 1D operator of order `2S` is described by coefficients `a_0 .. a_S` and
//! assembled in bilinear form as `L = Σ_s Δ_sᵀ · Diag(a_s) · Δ_s`, where
//! `Δ_1 = N (shift - I)` with modulo-N wraparound and `Δ_s = Δ_1^s`. The
//! bilinear form is positive semidefinite whenever every `a_s >= 0`.
//!
//! Multi-dimensional operators are sums of Kronecker products of 1D factors.
//! Grid points are flattened with axis 0 as the most significant digit:
//! `index = ((x_0 N + x_1) N + ...) + x_{D-1}`.

mod coefficient;
mod mask;
mod reciprocal;

pub use coefficient::{sample_coefficients, CoefficientFn, CoefficientKind, SamplingMode};
pub use mask::{apply_domain_mask, DomainMask};
pub use reciprocal::reciprocal_matrix;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

/// Largest flattened grid the tensor assembler accepts (`D log2 N <= 22`).
pub const MAX_GRID_POINTS: usize = 1 << 22;

pub(crate) fn check_grid(n: usize) -> Result<()> {
    if n >= 2 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::GridSize(n))
    }
}

/// `Σ_s ∂^s (a_s ∂^s ·)` on the periodic unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec1D {
    coefficients: Vec<CoefficientFn>,
}

impl OperatorSpec1D {
    /// `coefficients[s]` multiplies the order-`s` term, so `S = len - 1`.
    pub fn new(coefficients: Vec<CoefficientFn>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Spec("an operator needs at least a_0".into()));
        }
        for (s, c) in coefficients.iter().enumerate() {
            if (c.smoothness_order() as usize) < s {
                return Err(Error::Spec(format!(
                    "coefficient a_{s} has smoothness order {} < {s}",
                    c.smoothness_order()
                )));
            }
        }
        Ok(Self { coefficients })
    }

    /// Pure order-`2S` term `∂^S (a ∂^S ·)` with all lower coefficients zero.
    pub fn single_term(order: usize, a: CoefficientFn) -> Result<Self> {
        let mut coefficients = vec![CoefficientFn::constant(0.0); order];
        coefficients.push(a);
        Self::new(coefficients)
    }

    /// Multiplication by `a_0 = 1`.
    pub fn identity() -> Self {
        Self::new(vec![CoefficientFn::constant(1.0)]).expect("identity spec")
    }

    /// `S`, half the differential order.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[CoefficientFn] {
        &self.coefficients
    }
}

/// `Σ_β ⊗_α L_{β,α}` over `D` axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorOperatorSpec {
    dimension: usize,
    terms: Vec<Vec<OperatorSpec1D>>,
}

impl TensorOperatorSpec {
    pub fn new(dimension: usize, terms: Vec<Vec<OperatorSpec1D>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Spec("dimension must be >= 1".into()));
        }
        if terms.is_empty() {
            return Err(Error::Spec("at least one tensor term is required".into()));
        }
        for (b, t) in terms.iter().enumerate() {
            if t.len() != dimension {
                return Err(Error::Spec(format!(
                    "term {b} has {} factors, dimension is {dimension}",
                    t.len()
                )));
            }
        }
        Ok(Self { dimension, terms })
    }

    pub fn one_dimensional(spec: OperatorSpec1D) -> Self {
        Self {
            dimension: 1,
            terms: vec![vec![spec]],
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[Vec<OperatorSpec1D>] {
        &self.terms
    }

    /// `2S = max_β Σ_α 2 S_{β,α}`.
    pub fn total_order(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.iter().map(|f| 2 * f.order()).sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    /// Bandwidth volume `v = max_β Π_α (2 S_{β,α} + 1)`.
    pub fn bandwidth_volume(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.iter().map(|f| 2 * f.order() + 1).product::<usize>())
            .max()
            .unwrap_or(1)
    }
}

/// How the assembled matrix was produced; the splitter needs it to recover
/// grid offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Structure {
    /// Periodic band of half-width `S` on a 1D grid.
    Bands { half_width: usize },
    /// Per term, per axis half-widths `S_{β,α}`.
    Tensor { half_widths: Vec<Vec<usize>> },
    /// Raw matrix without grid metadata.
    Unstructured,
}

#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    n: usize,
    dimension: usize,
    matrix: CsrMatrix,
    structure: Structure,
    norm_estimate: f64,
    retained: Option<Vec<bool>>,
}

impl DiscretizedOperator {
    /// Wraps an arbitrary symmetric matrix. Solvers accept it; the splitter
    /// needs a structured operator.
    pub fn from_matrix(matrix: CsrMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::Dimension {
                expected: matrix.rows(),
                got: matrix.cols(),
            });
        }
        Ok(Self::assemble(
            matrix.rows(),
            1,
            matrix,
            Structure::Unstructured,
        ))
    }

    fn assemble(n: usize, dimension: usize, matrix: CsrMatrix, structure: Structure) -> Self {
        let norm_estimate = matrix.max_row_abs_sum();
        Self {
            n,
            dimension,
            matrix,
            structure,
            norm_estimate,
            retained: None,
        }
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Side of the square matrix, `N^D`.
    pub fn side(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Gershgorin upper bound on the spectral radius.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// Retained-point flags after masking; `None` when nothing was deleted.
    pub fn retained(&self) -> Option<&[bool]> {
        self.retained.as_deref()
    }

    /// Indices the solvers should work on.
    pub fn active_indices(&self) -> Vec<usize> {
        match &self.retained {
            Some(r) => (0..r.len()).filter(|&i| r[i]).collect(),
            None => (0..self.side()).collect(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }
}

/// `(Δ_1)^s` with `Δ_1 = N (shift - I)` and periodic wraparound.
pub fn finite_difference_matrix(s: usize, n: usize) -> Result<CsrMatrix> {
    check_grid(n)?;
    let scale = n as f64;
    let mut t = Vec::with_capacity(2 * n);
    for x in 0..n {
        t.push((x, x, -scale));
        t.push((x, (x + 1) % n, scale));
    }
    let d1 = CsrMatrix::from_triplets(n, n, &t);
    let mut out = CsrMatrix::identity(n);
    for _ in 0..s {
        out = out.matmul(&d1);
    }
    Ok(out)
}

fn factor_matrix(spec: &OperatorSpec1D, n: usize, mode: SamplingMode) -> Result<CsrMatrix> {
    check_grid(n)?;
    let s_max = spec.order();
    if 2 * s_max + 1 > n {
        return Err(Error::Spec(format!(
            "order 2S = {} needs at least {} grid points, got N = {n}",
            2 * s_max,
            2 * s_max + 1
        )));
    }
    let mut total = CsrMatrix::from_triplets(n, n, &[]);
    for (s, coeff) in spec.coefficients().iter().enumerate() {
        let a = coeff.sample(n, mode);
        if a.iter().all(|&v| v == 0.0) {
            continue;
        }
        let delta = finite_difference_matrix(s, n)?;
        let term = delta
            .transpose()
            .matmul(&CsrMatrix::diagonal(&a))
            .matmul(&delta);
        total = total.add(&term);
    }
    Ok(symmetrize(total))
}

/// Averages `A` and `Aᵀ` so the stored matrix is exactly symmetric.
fn symmetrize(m: CsrMatrix) -> CsrMatrix {
    let t: Vec<_> = m
        .iter()
        .flat_map(|(r, c, v)| [(r, c, 0.5 * v), (c, r, 0.5 * v)])
        .collect();
    CsrMatrix::from_triplets(m.rows(), m.cols(), &t)
}

pub fn build_operator_1d(spec: &OperatorSpec1D, n: usize) -> Result<DiscretizedOperator> {
    build_operator_1d_with(spec, n, SamplingMode::Spectral)
}

pub fn build_operator_1d_with(
    spec: &OperatorSpec1D,
    n: usize,
    mode: SamplingMode,
) -> Result<DiscretizedOperator> {
    let m = factor_matrix(spec, n, mode)?;
    Ok(DiscretizedOperator::assemble(
        n,
        1,
        m,
        Structure::Bands {
            half_width: spec.order(),
        },
    ))
}

pub fn build_operator_tensor(spec: &TensorOperatorSpec, n: usize) -> Result<DiscretizedOperator> {
    build_operator_tensor_with(spec, n, SamplingMode::Spectral)
}

pub fn build_operator_tensor_with(
    spec: &TensorOperatorSpec,
    n: usize,
    mode: SamplingMode,
) -> Result<DiscretizedOperator> {
    check_grid(n)?;
    let d = spec.dimension();
    let side = (n as u128).pow(d as u32);
    if side > MAX_GRID_POINTS as u128 {
        return Err(Error::TooLarge {
            what: "tensor grid (points)",
            required: side,
            limit: MAX_GRID_POINTS as u128,
        });
    }
    let side = side as usize;
    let mut total = CsrMatrix::from_triplets(side, side, &[]);
    for term in spec.terms() {
        let mut product = CsrMatrix::identity(1);
        for factor in term {
            product = product.kron(&factor_matrix(factor, n, mode)?);
        }
        total = total.add(&product);
    }
    let structure = if d == 1 {
        Structure::Bands {
            half_width: spec.total_order() / 2,
        }
    } else {
        Structure::Tensor {
            half_widths: spec
                .terms()
                .iter()
                .map(|t| t.iter().map(|f| f.order()).collect())
                .collect(),
        }
    };
    Ok(DiscretizedOperator::assemble(
        n,
        d,
        symmetrize(total),
        structure,
    ))
}

/// Multi-index of flattened point `i` (axis 0 most significant).
pub fn unflatten(i: usize, n: usize, dimension: usize) -> Vec<usize> {
    let mut out = vec![0; dimension];
    let mut rest = i;
    for a in (0..dimension).rev() {
        out[a] = rest % n;
        rest /= n;
    }
    out
}

pub fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &x| acc * n + x)
}
