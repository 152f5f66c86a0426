use super::UnitaryStep;
use crate::error::{Error, Result};
use crate::operator::DiscretizedOperator;
use crate::solver::eig_dense;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest side for which `U_Π` is assembled and diagonalized densely.
pub const MAX_SPLIT_DENSE_SIDE: usize = 1024;

#[derive(Debug, Clone, Serialize)]
pub struct PairDeviation {
    pub index_f: usize,
    pub exact: f64,
    pub split: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingError {
    pub tau: f64,
    pub order: u32,
    pub pairs: Vec<PairDeviation>,
}

impl SplittingError {
    pub fn max_deviation(&self) -> f64 {
        self.pairs.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }

    pub fn at(&self, f: usize) -> Option<&PairDeviation> {
        self.pairs.iter().find(|p| p.index_f == f)
    }
}

/// Eigenpair of `U_Π` matched to exact eigenpair `index_f`; `split = θ_f / τ`.
#[derive(Debug, Clone)]
pub struct SplitEigenpair {
    pub index_f: usize,
    pub exact: f64,
    pub split: f64,
    /// Full-length eigenvector, zero on masked points.
    pub vector: Vec<Complex64>,
}

/// `|λ_{f,Π} - λ_f|` for every eigenpair.
pub fn splitting_error(step: &UnitaryStep, op: &DiscretizedOperator) -> Result<SplittingError> {
    let pairs = split_eigenpairs(step, op)?
        .into_iter()
        .map(|p| PairDeviation {
            index_f: p.index_f,
            exact: p.exact,
            split: p.split,
            deviation: (p.split - p.exact).abs(),
        })
        .collect();
    Ok(SplittingError {
        tau: step.tau(),
        order: step.order(),
        pairs,
    })
}

/// Eigenpairs of the dense `U_Π`, matched to exact eigenpairs by greedy
/// maximal overlap; degenerate clusters are matched as subspaces.
pub fn split_eigenpairs(
    step: &UnitaryStep,
    op: &DiscretizedOperator,
) -> Result<Vec<SplitEigenpair>> {
    if step.side() != op.side() {
        return Err(Error::Dimension {
            expected: op.side(),
            got: step.side(),
        });
    }
    let active = op.active_indices();
    if active.len() > MAX_SPLIT_DENSE_SIDE {
        return Err(Error::TooLarge {
            what: "dense product-formula assembly (side)",
            required: active.len() as u128,
            limit: MAX_SPLIT_DENSE_SIDE as u128,
        });
    }
    let tau = step.tau();
    let exact = eig_dense(op)?;
    let rho = exact.iter().map(|p| p.value.abs()).fold(0.0, f64::max);
    if rho * tau >= PI {
        return Err(Error::PhaseWrap(rho * tau));
    }

    let full = step.to_dense();
    let k = active.len();
    let u = DMatrix::from_fn(k, k, |r, c| full[(active[r], active[c])]);
    let (phases, vectors) = unitary_eigen(&u, rho * tau);

    let clusters = cluster(&exact.iter().map(|p| p.value).collect::<Vec<_>>());
    let exact_vecs = DMatrix::from_fn(k, k, |r, f| Complex64::new(exact[f].vector[active[r]], 0.0));
    let overlaps = exact_vecs.adjoint() * &vectors;
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(k * clusters.len());
    for (ci, members) in clusters.iter().enumerate() {
        for uv in 0..k {
            let w: f64 = members.iter().map(|&f| overlaps[(f, uv)].norm_sqr()).sum();
            candidates.push((w, uv, ci));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut taken = vec![false; k];
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    for (_, uv, ci) in candidates {
        if !taken[uv] && assigned[ci].len() < clusters[ci].len() {
            taken[uv] = true;
            assigned[ci].push(uv);
        }
    }

    let side = op.side();
    let mut pairs = Vec::with_capacity(k);
    for (members, mut cols) in clusters.into_iter().zip(assigned) {
        cols.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
        for (&f, uv) in members.iter().zip(cols) {
            let mut vector = vec![Complex64::new(0.0, 0.0); side];
            for (r, &i) in active.iter().enumerate() {
                vector[i] = vectors[(r, uv)];
            }
            pairs.push(SplitEigenpair {
                index_f: f,
                exact: exact[f].value,
                split: phases[uv] / tau,
                vector,
            });
        }
    }
    pairs.sort_by_key(|p| p.index_f);
    Ok(pairs)
}

/// Eigenphases and eigenvectors of a unitary whose phases lie in
/// `[-ε, phase_hi]` with `phase_hi < π`. Diagonalizes the Hermitian
/// `Re(e^{-iφ0} U)`, whose eigenvalues `cos(θ - φ0)` separate that range, then
/// reads each phase as `arg(v†Uv)`.
pub fn unitary_eigen(u: &DMatrix<Complex64>, phase_hi: f64) -> (Vec<f64>, DMatrix<Complex64>) {
    let rot = Complex64::from_polar(1.0, -(phase_hi + PI) / 2.0);
    let h = (u * rot + u.adjoint() * rot.conj()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let phases = (0..u.nrows())
        .map(|c| {
            let v = eig.eigenvectors.column(c);
            (v.adjoint() * u * v)[(0, 0)].arg()
        })
        .collect();
    (phases, eig.eigenvectors)
}

/// Groups ascending eigenvalues that coincide to 1e-8 relative.
fn cluster(values: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (f, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (v - values[c[0]]).abs() <= 1e-8 * v.abs().max(1.0) => c.push(f),
            _ => out.push(vec![f]),
        }
    }
    out
}

/// `τ = c / N^{2(S(1 + 1/ν) + 1/ν)}`.
pub fn choose_tau(n: usize, s: usize, nu: u32, safety_constant: f64) -> f64 {
    let nu = nu as f64;
    let exponent = 2.0 * (s as f64 * (1.0 + 1.0 / nu) + 1.0 / nu);
    safety_constant / (n as f64).powf(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, OperatorSpec1D};
    use crate::splitting::split_operator;
    use std::sync::Arc;

    fn laplacian(n: usize) -> DiscretizedOperator {
        build_operator_1d(
            &OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn tau_rule_examples() {
        assert!((choose_tau(10, 1, 2, 1.0) - 1e-4).abs() < 1e-18);
        assert!((choose_tau(10, 1, 4, 1.0) - 1e-3).abs() < 1e-17);
        assert!((choose_tau(10, 1, 2, 0.5) - 0.5e-4).abs() < 1e-18);
    }

    #[test]
    fn one_part_plan_has_no_splitting_error() {
        let a = CoefficientFn::fourier(2.0, &[(1.0, 0.0)]).unwrap();
        let op = build_operator_1d(&OperatorSpec1D::new(vec![a]).unwrap(), 8).unwrap();
        let step = UnitaryStep::strang(Arc::new(split_operator(&op).unwrap()), 0.5);
        assert!(splitting_error(&step, &op).unwrap().max_deviation() <= 1e-12);
    }

    #[test]
    fn halving_tau_quarters_the_error() {
        let op = laplacian(8);
        let plan = Arc::new(split_operator(&op).unwrap());
        let e = |tau| {
            splitting_error(&UnitaryStep::strang(plan.clone(), tau), &op)
                .unwrap()
                .max_deviation()
        };
        let ratio = e(2e-4) / e(1e-4);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn every_pair_is_matched_once() {
        let op = laplacian(16);
        let plan = Arc::new(split_operator(&op).unwrap());
        let err = splitting_error(&UnitaryStep::suzuki(plan, 1e-3), &op).unwrap();
        let idx: Vec<usize> = err.pairs.iter().map(|p| p.index_f).collect();
        assert_eq!(idx, (0..16).collect::<Vec<_>>());
        assert!(err
            .pairs
            .iter()
            .all(|p| p.deviation < 1e-2 * p.exact.max(1.0)));
    }

    #[test]
    fn phase_wrap_is_rejected() {
        let op = laplacian(8);
        let plan = Arc::new(split_operator(&op).unwrap());
        let tau = PI / 256.0;
        assert!(matches!(
            splitting_error(&UnitaryStep::strang(plan, tau), &op),
            Err(Error::PhaseWrap(_))
        ));
    }
}
