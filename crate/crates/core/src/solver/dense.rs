use super::EigenPair;
use crate::error::{Error, Result};
use crate::operator::DiscretizedOperator;
use nalgebra::SymmetricEigen;

/// Largest side the dense solver accepts.
pub const MAX_DENSE_SIDE: usize = 4096;

/// Full spectrum, ascending, with orthonormal eigenvectors. Deleted points
/// of a masked operator are skipped; vectors are zero there.
pub fn eig_dense(op: &DiscretizedOperator) -> Result<Vec<EigenPair>> {
    let active = op.active_indices();
    if active.len() > MAX_DENSE_SIDE {
        return Err(Error::TooLarge {
            what: "dense eigensolver (side)",
            required: active.len() as u128,
            limit: MAX_DENSE_SIDE as u128,
        });
    }
    let sub = if active.len() == op.side() {
        op.matrix().to_dense()
    } else {
        op.matrix().principal_submatrix(&active).to_dense()
    };
    let eig = SymmetricEigen::new(sub);
    let mut order: Vec<usize> = (0..active.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(f, k)| {
            let mut vector = vec![0.0; op.side()];
            let col = eig.eigenvectors.column(k);
            let norm = col.norm();
            for (slot, &i) in active.iter().enumerate() {
                vector[i] = col[slot] / norm;
            }
            EigenPair {
                value: eig.eigenvalues[k],
                vector,
                index_f: f,
            }
        })
        .collect())
}
