use super::banded::ShiftedSolver;
use super::EigenPair;
use crate::error::{Error, Result};
use crate::operator::DiscretizedOperator;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    /// Converged when `‖Lv - λv‖ ≤ tol · max(1, |λ|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// On a singular shift, retry with a nudged shift instead of failing.
    pub retry_singular: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            seed: 0x5eed,
            retry_singular: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrylovSolution {
    pub pair: EigenPair,
    pub shift_used: f64,
    pub shift_perturbed: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Floating-point operations: factorization, solves and the Lanczos loop.
    pub ops: u64,
}

/// Eigenpair closest to `mu` by shift-invert Lanczos with full
/// reorthogonalization. `f` is recorded as the pair's index label.
pub fn eig_lowest_krylov(op: &DiscretizedOperator, f: usize, mu: f64) -> Result<KrylovSolution> {
    eig_lowest_krylov_with(op, f, mu, &KrylovOptions::default())
}

pub fn eig_lowest_krylov_with(
    op: &DiscretizedOperator,
    f: usize,
    mu: f64,
    opts: &KrylovOptions,
) -> Result<KrylovSolution> {
    let active = op.active_indices();
    let compact;
    let a = if active.len() == op.side() {
        op.matrix()
    } else {
        compact = op.matrix().principal_submatrix(&active);
        &compact
    };

    let scale = op.norm_estimate().max(1.0);
    let mut shift = mu;
    let mut perturbed = false;
    let mut solver = None;
    for attempt in 0..5 {
        match ShiftedSolver::new(a, shift) {
            Ok(s) => {
                solver = Some(s);
                break;
            }
            Err(Error::SingularShift(_)) if opts.retry_singular => {
                perturbed = true;
                shift = mu + 1e-7 * scale * f64::from(1u32 << attempt);
                log::warn!("singular shift {mu}; retrying at {shift}");
            }
            Err(e) => return Err(e),
        }
    }
    let mut solver = solver.ok_or(Error::SingularShift(mu))?;

    // The basis comes from shift-invert, but Ritz pairs are extracted from L
    // itself: solves near an eigenvalue carry O(eps cond) error that would
    // otherwise cap the attainable residual.
    let n = a.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut loop_ops = 0u64;
    let mut best = (f64::INFINITY, 0.0, Vec::new());

    for j in 0..opts.max_iter.min(n) {
        let lq = a.mul_vec(&q);
        let row: Vec<f64> = basis.iter().map(|b| dot(b, &lq)).collect();
        let diag = dot(&q, &lq);
        for (r, v) in h.iter_mut().zip(&row) {
            r.push(*v);
        }
        let mut last = row;
        last.push(diag);
        h.push(last);
        basis.push(q);
        images.push(lq);
        let k = basis.len();
        loop_ops += (2 * a.nnz() + 2 * n * k) as u64;

        let hm = DMatrix::from_fn(k, k, |r, c| 0.5 * (h[r][c] + h[c][r]));
        let eig = SymmetricEigen::new(hm);
        let pick = (0..k)
            .min_by(|&x, &y| {
                (eig.eigenvalues[x] - mu)
                    .abs()
                    .total_cmp(&(eig.eigenvalues[y] - mu).abs())
            })
            .unwrap();
        let lambda = eig.eigenvalues[pick];
        let s = eig.eigenvectors.column(pick);
        let mut v = vec![0.0; n];
        let mut lv = vec![0.0; n];
        for ((c, b), l) in s.iter().zip(&basis).zip(&images) {
            axpy(*c, b, &mut v);
            axpy(*c, l, &mut lv);
        }
        let residual = lv
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).powi(2))
            .sum::<f64>()
            .sqrt();
        loop_ops += (4 * n * k + 2 * n) as u64 + (k * k * k) as u64;
        log::trace!("j={j} lambda={lambda} residual={residual:e}");
        if residual < best.0 {
            best = (residual, lambda, v);
        }
        if best.0 <= opts.tol * best.1.abs().max(1.0) {
            let (residual, value, mut v) = best;
            normalize(&mut v);
            let mut vector = vec![0.0; op.side()];
            for (slot, &i) in active.iter().enumerate() {
                vector[i] = v[slot];
            }
            return Ok(KrylovSolution {
                pair: EigenPair {
                    value,
                    vector,
                    index_f: f,
                },
                shift_used: shift,
                shift_perturbed: perturbed,
                iterations: j + 1,
                residual,
                ops: solver.ops() + loop_ops,
            });
        }

        let mut w = solver.solve(&basis[j]);
        let before = norm(&w);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        loop_ops += 8 * (n * k) as u64;
        let bj = norm(&w);
        if bj <= 1e-12 * before {
            break;
        }
        w.iter_mut().for_each(|x| *x /= bj);
        q = w;
    }
    Err(Error::NoConvergence {
        iterations: basis.len(),
        residual: best.0,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}
