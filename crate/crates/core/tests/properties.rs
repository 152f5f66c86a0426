use eigenlab::operator::{
    build_operator_1d, build_operator_tensor, CoefficientFn, OperatorSpec1D, TensorOperatorSpec,
};
use eigenlab::phase::{decode_phase, index_distribution_analytic, sample_bins};
use eigenlab::solver::{eig_dense, prolong_state};
use eigenlab::splitting::{split_operator, UnitaryStep};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn grid() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![4usize, 8, 16])
}

/// `2 + a cos 2πx + b sin 2πx`, positive for `|a|, |b| < 1`.
fn spec(order: usize, a: f64, b: f64) -> OperatorSpec1D {
    let c = CoefficientFn::fourier(2.0, &[(a, b)]).unwrap();
    OperatorSpec1D::single_term(order, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parts_sum_to_the_operator(n in grid(), order in 1usize..3, a in -0.9f64..0.9, b in -0.9f64..0.9) {
        prop_assume!(2 * order < n);
        let op = build_operator_1d(&spec(order, a, b), n).unwrap();
        let plan = split_operator(&op).unwrap();
        let diff = plan.reconstruct().to_dense() - op.matrix().to_dense();
        prop_assert!(diff.amax() <= 1e-12 * op.matrix().max_abs());
        prop_assert!(plan.r() <= 2 * order + 1);
    }

    #[test]
    fn operator_is_symmetric_and_semidefinite(n in grid(), a in -0.9f64..0.9, b in -0.9f64..0.9) {
        let op = build_operator_1d(&spec(1, a, b), n).unwrap();
        prop_assert!(op.matrix().max_asymmetry() == 0.0);
        let pairs = eig_dense(&op).unwrap();
        prop_assert!(pairs[0].value.abs() <= 1e-9 * pairs.last().unwrap().value);
        prop_assert!(pairs.iter().all(|p| p.value >= -1e-9 * pairs.last().unwrap().value));
    }

    #[test]
    fn step_is_unitary(n in grid(), tau in 1e-5f64..1e-3, suzuki in any::<bool>(), seed in 0u64..1000) {
        let op = build_operator_1d(&spec(1, 0.5, 0.1), n).unwrap();
        let plan = Arc::new(split_operator(&op).unwrap());
        let step = if suzuki { UnitaryStep::suzuki(plan, tau) } else { UnitaryStep::strang(plan, tau) };
        let mut psi: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = (seed as f64 + 1.0) * (i as f64 + 0.5);
                Complex64::new(t.sin(), t.cos())
            })
            .collect();
        let norm0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        step.apply_power(&mut psi, 7);
        let norm1: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm1 - norm0).abs() <= 1e-12 * norm0);
    }

    #[test]
    fn decode_recovers_grid_phases(k in 1u32..11, l in 0usize..1024, tau in 1e-4f64..1.0) {
        let m = 1usize << k;
        let l = l % m;
        let (lambda, hw) = decode_phase(l, m, tau);
        prop_assert!((hw - PI / (m as f64 * tau)).abs() <= 1e-12 * hw);
        let dist = index_distribution_analytic(lambda, tau, m);
        let peak = dist.iter().cloned().fold(0.0, f64::max);
        prop_assert!((dist[l] - 1.0).abs() < 1e-9 && (peak - dist[l]).abs() < 1e-12);
    }

    #[test]
    fn analytic_distribution_is_normalized(lambda in -100.0f64..100.0, tau in 1e-3f64..3e-2, k in 2u32..10) {
        let d = index_distribution_analytic(lambda, tau, 1 << k);
        let total: f64 = d.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(d.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
    }

    #[test]
    fn sampling_is_seeded(seed in any::<u64>()) {
        let d = index_distribution_analytic(12.3, 0.05, 32);
        let a = sample_bins(&d, 200, seed);
        prop_assert_eq!(&a, &sample_bins(&d, 200, seed));
        prop_assert!(a.iter().all(|&b| b < 32));
    }

    #[test]
    fn prolongation_keeps_unit_norm(n0 in prop::sample::select(vec![4usize, 8]), up in 1u32..3, f in 0usize..4) {
        let op = build_operator_1d(&spec(1, 0.5, 0.0), n0).unwrap();
        let pair = eig_dense(&op).unwrap().swap_remove(f);
        let g = prolong_state(&pair, n0, n0 << up, 1).unwrap();
        let norm: f64 = g.fine_vector.iter().map(|x| x * x).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!((g.predicted_overlap - (1.0 - 1.0 / (n0 * n0) as f64)).abs() < 1e-15);
    }
}

#[test]
fn kronecker_axis_zero_is_most_significant() {
    let n = 4;
    let diag =
        OperatorSpec1D::new(vec![CoefficientFn::fourier(1.0, &[(0.5, 0.0)]).unwrap()]).unwrap();
    let id = OperatorSpec1D::identity();
    let spec = TensorOperatorSpec::new(2, vec![vec![diag, id]]).unwrap();
    let op = build_operator_tensor(&spec, n).unwrap();
    let one = build_operator_1d(
        &OperatorSpec1D::new(vec![CoefficientFn::fourier(1.0, &[(0.5, 0.0)]).unwrap()]).unwrap(),
        n,
    )
    .unwrap();
    for i in 0..n * n {
        assert!((op.matrix().get(i, i) - one.matrix().get(i / n, i / n)).abs() < 1e-14);
    }
}
