use super::SplitPlan;
use crate::error::Result;
use crate::registry::Registry;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// `1 / (2 - 2^{1/3})`.
pub const SUZUKI_GAMMA: f64 = 1.351_207_191_959_657_6;

/// A product formula is a schedule of `(part, fraction of τ)` sub-steps,
/// applied to the state in order.
pub trait ProductFormula: Send + Sync {
    fn order(&self) -> u32;
    fn schedule(&self, parts: usize) -> Vec<(usize, f64)>;
}

/// Symmetric product: parts ascending at τ/2, then descending at τ/2.
pub struct Strang;

impl ProductFormula for Strang {
    fn order(&self) -> u32 {
        2
    }

    fn schedule(&self, parts: usize) -> Vec<(usize, f64)> {
        let forward = (0..parts).map(|p| (p, 0.5));
        let backward = (0..parts).rev().map(|p| (p, 0.5));
        merge(forward.chain(backward))
    }
}

/// Triple-jump composition of [`Strang`] with weights `γ, 1 - 2γ, γ`.
pub struct Suzuki4;

impl ProductFormula for Suzuki4 {
    fn order(&self) -> u32 {
        4
    }

    fn schedule(&self, parts: usize) -> Vec<(usize, f64)> {
        let inner = Strang.schedule(parts);
        let g = SUZUKI_GAMMA;
        merge(
            [g, 1.0 - 2.0 * g, g]
                .into_iter()
                .flat_map(|w| inner.iter().map(move |&(p, f)| (p, w * f))),
        )
    }
}

fn merge(steps: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (p, f) in steps {
        match out.last_mut() {
            Some((q, g)) if *q == p => *g += f,
            _ => out.push((p, f)),
        }
    }
    out
}

/// `strang` (ν = 2) and `suzuki4` (ν = 4).
pub fn product_formulas() -> Registry<dyn ProductFormula> {
    let mut r: Registry<dyn ProductFormula> = Registry::new("product formula");
    r.register("strang", Arc::new(Strang));
    r.register("suzuki4", Arc::new(Suzuki4));
    r
}

/// One application of `U_Π ≈ exp(iΛτ)`.
#[derive(Clone)]
pub struct UnitaryStep {
    plan: Arc<SplitPlan>,
    tau: f64,
    order: u32,
    schedule: Vec<(usize, f64)>,
}

impl UnitaryStep {
    pub fn new(plan: Arc<SplitPlan>, tau: f64, formula: &dyn ProductFormula) -> Self {
        let schedule = formula.schedule(plan.r());
        Self {
            plan,
            tau,
            order: formula.order(),
            schedule,
        }
    }

    pub fn strang(plan: Arc<SplitPlan>, tau: f64) -> Self {
        Self::new(plan, tau, &Strang)
    }

    pub fn suzuki(plan: Arc<SplitPlan>, tau: f64) -> Self {
        Self::new(plan, tau, &Suzuki4)
    }

    pub fn by_name(plan: Arc<SplitPlan>, tau: f64, formula: &str) -> Result<Self> {
        Ok(Self::new(
            plan,
            tau,
            product_formulas().get(formula)?.as_ref(),
        ))
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn plan(&self) -> &SplitPlan {
        &self.plan
    }

    pub fn side(&self) -> usize {
        self.plan.side
    }

    pub fn apply(&self, psi: &mut [Complex64]) {
        assert_eq!(psi.len(), self.plan.side, "state does not match the plan");
        for &(p, f) in &self.schedule {
            self.plan.parts[p].exp_apply(f * self.tau, psi);
        }
    }

    pub fn apply_power(&self, psi: &mut [Complex64], k: usize) {
        for _ in 0..k {
            self.apply(psi);
        }
    }

    /// Dense `U_Π`, column by column.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.plan.side;
        let mut u = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            col[c] = Complex64::new(1.0, 0.0);
            self.apply(&mut col);
            for (r, z) in col.iter().enumerate() {
                u[(r, c)] = *z;
            }
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, DiscretizedOperator, OperatorSpec1D};
    use crate::sparse::CsrMatrix;
    use crate::splitting::split_operator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exact_exp(op: &DiscretizedOperator, tau: f64) -> DMatrix<Complex64> {
        let m = op.matrix().to_dense().map(|v| Complex64::new(0.0, v * tau));
        m.exp()
    }

    fn plan_for(op: &DiscretizedOperator) -> Arc<SplitPlan> {
        Arc::new(split_operator(op).unwrap())
    }

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn gamma_closed_form() {
        assert!((SUZUKI_GAMMA - 1.0 / (2.0 - 2f64.powf(1.0 / 3.0))).abs() < 1e-15);
        assert!((SUZUKI_GAMMA - 1.35121).abs() < 1e-5);
    }

    #[test]
    fn schedules_are_palindromic_and_sum_to_one_per_part() {
        for f in [&Strang as &dyn ProductFormula, &Suzuki4] {
            let s = f.schedule(3);
            let rev: Vec<_> = s.iter().rev().copied().collect();
            for (a, b) in s.iter().zip(&rev) {
                assert_eq!(a.0, b.0);
                assert!((a.1 - b.1).abs() < 1e-15);
            }
            for p in 0..3 {
                let total: f64 = s.iter().filter(|x| x.0 == p).map(|x| x.1).sum();
                assert!((total - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(
            Strang.schedule(3),
            vec![(0, 0.5), (1, 0.5), (2, 1.0), (1, 0.5), (0, 0.5)]
        );
    }

    #[test]
    fn single_part_is_exact() {
        let a = CoefficientFn::fourier(1.5, &[(0.5, 0.0)]).unwrap();
        let op = build_operator_1d(&OperatorSpec1D::new(vec![a]).unwrap(), 8).unwrap();
        let plan = plan_for(&op);
        assert_eq!(plan.r(), 1);
        let exact = exact_exp(&op, 0.3);
        assert!(max_diff(&UnitaryStep::strang(plan.clone(), 0.3).to_dense(), &exact) < 1e-13);
        assert!(max_diff(&UnitaryStep::suzuki(plan, 0.3).to_dense(), &exact) < 1e-13);
    }

    #[test]
    fn commuting_diagonal_parts_are_exact() {
        let d1 = super::super::SplitPart::Diagonal(vec![1.0, 2.0, 3.0, 4.0]);
        let d2 = super::super::SplitPart::Diagonal(vec![-0.5, 0.25, 7.0, 0.0]);
        let plan = SplitPlan {
            parts: vec![d1, d2],
            side: 4,
            bandwidth_volume: 1,
            r_qubits: 0,
            scale: 1.0,
            structure: crate::operator::Structure::Bands { half_width: 0 },
        };
        let op =
            DiscretizedOperator::from_matrix(CsrMatrix::diagonal(&[0.5, 2.25, 10.0, 4.0])).unwrap();
        let u = UnitaryStep::strang(Arc::new(plan), 0.2).to_dense();
        assert!(max_diff(&u, &exact_exp(&op, 0.2)) < 1e-12);
    }

    #[test]
    fn random_states_keep_their_norm() {
        let a = CoefficientFn::fourier(2.0, &[(1.0, 0.0)]).unwrap();
        let op = build_operator_1d(&OperatorSpec1D::single_term(1, a).unwrap(), 16).unwrap();
        let plan = plan_for(&op);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for formula in ["strang", "suzuki4"] {
            let step = UnitaryStep::by_name(plan.clone(), 1e-3, formula).unwrap();
            for _ in 0..100 {
                let mut psi: Vec<Complex64> = (0..16)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect();
                let before: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                step.apply(&mut psi);
                let after: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!((before - after).abs() <= 1e-12 * before);
            }
        }
        assert!(UnitaryStep::by_name(plan, 1e-3, "yoshida8").is_err());
    }

    #[test]
    fn strang_step_error_is_third_order_per_step() {
        let op = build_operator_1d(
            &OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap(),
            8,
        )
        .unwrap();
        let plan = plan_for(&op);
        let e = |tau: f64| {
            max_diff(
                &UnitaryStep::strang(plan.clone(), tau).to_dense(),
                &exact_exp(&op, tau),
            )
        };
        let (a, b) = (e(1e-4), e(5e-5));
        let rate = (a / b).log2();
        assert!((rate - 3.0).abs() < 0.2, "per-step rate {rate}");
        let norm = 256.0;
        assert!(a <= (norm * 1e-4f64).powi(3));
    }
}
