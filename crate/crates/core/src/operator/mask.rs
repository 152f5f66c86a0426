use super::{unflatten, DiscretizedOperator};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

type Predicate = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// Boolean predicate over grid multi-indices; `true` keeps the point.
#[derive(Clone)]
pub struct DomainMask {
    n: usize,
    dimension: usize,
    predicate: Predicate,
    retained: Vec<bool>,
}

impl fmt::Debug for DomainMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainMask")
            .field("n", &self.n)
            .field("dimension", &self.dimension)
            .field("retained_count", &self.retained_count())
            .finish()
    }
}

impl DomainMask {
    pub fn new<F>(n: usize, dimension: usize, predicate: F) -> Self
    where
        F: Fn(&[usize]) -> bool + Send + Sync + 'static,
    {
        let predicate: Predicate = Arc::new(predicate);
        let side = n.pow(dimension as u32);
        let retained = (0..side)
            .map(|i| predicate(&unflatten(i, n, dimension)))
            .collect();
        Self {
            n,
            dimension,
            predicate,
            retained,
        }
    }

    pub fn all(n: usize, dimension: usize) -> Self {
        Self::new(n, dimension, |_| true)
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        (self.predicate)(idx)
    }

    pub fn retained(&self) -> &[bool] {
        &self.retained
    }

    pub fn retained_count(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }
}

/// Deletes masked-out points: every coupling touching a deleted point and its
/// diagonal entry are zeroed. Index layout is unchanged; deleted points are
/// flagged so solvers restrict themselves to the retained subspace.
pub fn apply_domain_mask(
    op: &DiscretizedOperator,
    mask: &DomainMask,
) -> Result<DiscretizedOperator> {
    if mask.n != op.n() || mask.dimension != op.dimension() {
        return Err(Error::Mask(format!(
            "mask grid {}^{} does not match operator grid {}^{}",
            mask.n,
            mask.dimension,
            op.n(),
            op.dimension()
        )));
    }
    if mask.retained_count() == 0 {
        return Err(Error::Mask("mask retains no points".into()));
    }
    let keep = match op.retained() {
        Some(prev) => prev
            .iter()
            .zip(&mask.retained)
            .map(|(a, b)| *a && *b)
            .collect(),
        None => mask.retained.clone(),
    };
    let matrix = op
        .matrix()
        .filter_map(|r, c, v| if keep[r] && keep[c] { v } else { 0.0 });
    let mut out = op.clone();
    out.norm_estimate = matrix.max_row_abs_sum();
    out.matrix = matrix;
    out.retained = if keep.iter().all(|&k| k) {
        None
    } else {
        Some(keep)
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, OperatorSpec1D};
    use crate::sparse::CsrMatrix;
    use nalgebra::SymmetricEigen;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> DiscretizedOperator {
        let spec = OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap();
        build_operator_1d(&spec, n).unwrap()
    }

    #[test]
    fn all_true_mask_leaves_operator_unchanged() {
        let op = laplacian(8);
        let masked = apply_domain_mask(&op, &DomainMask::all(8, 1)).unwrap();
        assert_eq!(masked.matrix(), op.matrix());
        assert!(masked.retained().is_none());
    }

    #[test]
    fn cut_removes_wraparound_and_matches_open_chain() {
        let op = laplacian(8);
        let mask = DomainMask::new(8, 1, |x| x[0] < 4);
        let masked = apply_domain_mask(&op, &mask).unwrap();
        let block = masked
            .matrix()
            .principal_submatrix(&masked.active_indices());
        // Open 4-point chain at grid spacing 1/8.
        let s = 64.0;
        let mut t = Vec::new();
        for i in 0..4 {
            t.push((i, i, 2.0 * s));
            if i + 1 < 4 {
                t.push((i, i + 1, -s));
                t.push((i + 1, i, -s));
            }
        }
        let direct = CsrMatrix::from_triplets(4, 4, &t);
        assert_eq!(block, direct);
        let mut eig: Vec<f64> = SymmetricEigen::new(block.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        for (k, e) in eig.iter().enumerate() {
            let expected = s * (2.0 - 2.0 * (PI * (k + 1) as f64 / 5.0).cos());
            assert!((e - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn single_deletion_is_principal_submatrix() {
        let op = laplacian(8);
        let masked = apply_domain_mask(&op, &DomainMask::new(8, 1, |x| x[0] != 5)).unwrap();
        let keep: Vec<usize> = (0..8).filter(|&i| i != 5).collect();
        assert_eq!(masked.active_indices(), keep);
        assert_eq!(
            masked.matrix().principal_submatrix(&keep),
            op.matrix().principal_submatrix(&keep)
        );
    }

    #[test]
    fn masked_operator_never_couples_across_the_boundary() {
        let op = laplacian(16);
        let mask = DomainMask::new(16, 1, |x| (x[0] / 3) % 2 == 0);
        let masked = apply_domain_mask(&op, &mask).unwrap();
        let keep = mask.retained();
        for (r, c, _) in masked.matrix().iter() {
            assert!(
                keep[r] && keep[c],
                "entry ({r}, {c}) touches a deleted point"
            );
        }
        assert!(masked.matrix().max_asymmetry() == 0.0);
    }

    #[test]
    fn empty_and_mismatched_masks_rejected() {
        let op = laplacian(8);
        assert!(apply_domain_mask(&op, &DomainMask::new(8, 1, |_| false)).is_err());
        assert!(apply_domain_mask(&op, &DomainMask::all(16, 1)).is_err());
    }
}
