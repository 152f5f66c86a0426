//! Statevector simulation of phase estimation on `U_Π`.

mod state;

pub use state::{reflection_overlap, RegisterLayout, Stage, StateVector, MAX_AMPLITUDES};

use crate::error::{Error, Result};
use crate::splitting::UnitaryStep;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// `|b_l|² = sin²(MΔ/2) / (M² sin²(Δ/2))` with `Δ = λτ - 2πl/M`.
pub fn index_distribution_analytic(lambda_pi: f64, tau: f64, m: usize) -> Vec<f64> {
    let mf = m as f64;
    (0..m)
        .map(|l| {
            let mut delta = (lambda_pi * tau - 2.0 * PI * l as f64 / mf).rem_euclid(2.0 * PI);
            if delta > PI {
                delta -= 2.0 * PI;
            }
            if delta.abs() * mf < 1e-6 {
                1.0 - (mf * mf - 1.0) * delta * delta / 12.0
            } else {
                let num = (mf * delta / 2.0).sin();
                let den = mf * (delta / 2.0).sin();
                (num / den).powi(2)
            }
        })
        .collect()
}

/// `(λ̂, half-width)` for bin `l`; bins above `M/2` decode as negative.
pub fn decode_phase(l: usize, m: usize, tau: f64) -> (f64, f64) {
    let signed = if 2 * l > m {
        l as f64 - m as f64
    } else {
        l as f64
    };
    let theta = 2.0 * PI * signed / m as f64;
    (theta / tau, PI / (m as f64 * tau))
}

/// `(M²sin²(π/2M))⁻¹`, the worst-case peak probability.
pub fn peak_probability_bound(m: usize) -> f64 {
    let mf = m as f64;
    1.0 / (mf * mf * (PI / (2.0 * mf)).sin().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum MeasureMode {
    Exact,
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodedSample {
    pub bin: usize,
    pub lambda: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub n: usize,
    pub dimension: usize,
    pub m: usize,
    pub tau: f64,
    pub nu: u32,
    pub shift: f64,
    pub mode: MeasureMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseEstimateResult {
    pub distribution: Vec<f64>,
    pub samples: Vec<usize>,
    pub seed: Option<u64>,
    /// Per sample, or the single most likely bin in exact mode.
    pub decoded: Vec<DecodedSample>,
    pub reflection_overlap: Option<f64>,
    pub run: RunRecord,
}

impl PhaseEstimateResult {
    pub fn argmax(&self) -> usize {
        argmax(&self.distribution)
    }
}

fn argmax(p: &[f64]) -> usize {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

/// Seeded inverse-CDF draws.
pub fn sample_bins(distribution: &[f64], count: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(distribution.len());
    let mut acc = 0.0;
    for &p in distribution {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last = distribution.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Measures the index register of a transformed state.
pub fn measure_index(
    state: &StateVector,
    mode: MeasureMode,
    tau: f64,
    shift: f64,
) -> Result<(Vec<f64>, Vec<usize>, Vec<DecodedSample>)> {
    if state.stage() != Stage::Transformed {
        return Err(Error::Register(format!(
            "measurement needs the index QFT first, state is {:?}",
            state.stage()
        )));
    }
    let m = state.layout().m;
    let dist = state.index_marginal();
    let decode = |bin: usize| {
        let (lambda, half_width) = decode_phase(bin, m, tau);
        DecodedSample {
            bin,
            lambda: lambda - shift,
            half_width,
        }
    };
    let (samples, decoded) = match mode {
        MeasureMode::Exact => (Vec::new(), vec![decode(argmax(&dist))]),
        MeasureMode::Sample { count, seed } => {
            let s = sample_bins(&dist, count, seed);
            let d = s.iter().map(|&b| decode(b)).collect();
            (s, d)
        }
    };
    Ok((dist, samples, decoded))
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseRunOptions {
    pub m: usize,
    pub mode: MeasureMode,
    /// Diagonal shift `μ` added to the evolution and subtracted after decoding.
    pub shift: f64,
    pub symmetry_hook: bool,
}

/// load → superpose → controlled powers → QFT → measure.
pub fn run_phase_estimation(
    step: &UnitaryStep,
    n: usize,
    dimension: usize,
    guess: &[Complex64],
    opts: &PhaseRunOptions,
) -> Result<PhaseEstimateResult> {
    let layout = RegisterLayout::new(n, dimension, opts.m)?;
    let mut st = StateVector::load_accumulator(guess, layout)?;
    st.index_superposition()?;
    st.controlled_powers(step, opts.shift)?;
    st.qft_index();
    let norm = st.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let (distribution, samples, decoded) = measure_index(&st, opts.mode, step.tau(), opts.shift)?;
    let reflection = if opts.symmetry_hook {
        let peak = argmax(&distribution);
        Some(reflection_overlap(&st.collapse(peak)?, n, dimension))
    } else {
        None
    };
    Ok(PhaseEstimateResult {
        distribution,
        samples,
        seed: match opts.mode {
            MeasureMode::Sample { seed, .. } => Some(seed),
            MeasureMode::Exact => None,
        },
        decoded,
        reflection_overlap: reflection,
        run: RunRecord {
            n,
            dimension,
            m: opts.m,
            tau: step.tau(),
            nu: step.order(),
            shift: opts.shift,
            mode: opts.mode,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_operator_1d, CoefficientFn, OperatorSpec1D};
    use crate::solver::eig_dense;
    use crate::splitting::{choose_tau, split_operator, splitting_error, unitary_eigen};
    use std::sync::Arc;

    fn lift(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn exact(m: usize) -> PhaseRunOptions {
        PhaseRunOptions {
            m,
            mode: MeasureMode::Exact,
            shift: 0.0,
            symmetry_hook: false,
        }
    }

    #[test]
    fn analytic_distribution_cases() {
        let m = 16;
        let tau = 0.1;
        let on_grid = 2.0 * PI * 5.0 / (m as f64 * tau);
        let d = index_distribution_analytic(on_grid, tau, m);
        assert!((d[5] - 1.0).abs() < 1e-12);
        assert!(d.iter().enumerate().all(|(l, &p)| l == 5 || p < 1e-20));
        let z = index_distribution_analytic(0.0, tau, m);
        assert_eq!(z[0], 1.0);
        for m in [16, 64, 1024] {
            let half = 2.0 * PI * 3.5 / (m as f64 * tau);
            let d = index_distribution_analytic(half, tau, m);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let peak = d.iter().cloned().fold(0.0, f64::max);
            assert!(peak >= peak_probability_bound(m) - 1e-12);
        }
        assert!((peak_probability_bound(1 << 20) - 4.0 / (PI * PI)).abs() < 1e-6);
    }

    #[test]
    fn decode_wraps_upper_half() {
        let (m, tau) = (64, 0.01);
        assert_eq!(decode_phase(0, m, tau).0, 0.0);
        let (l, hw) = decode_phase(m - 1, m, tau);
        assert!((l + 2.0 * PI / (m as f64 * tau)).abs() < 1e-9);
        assert!((hw - PI / (m as f64 * tau)).abs() < 1e-12);
        let lambda = 2.0 * PI * 7.0 / (m as f64 * tau);
        let bin = (lambda * tau * m as f64 / (2.0 * PI)).round() as usize;
        assert_eq!(decode_phase(bin, m, tau).0, lambda);
    }

    #[test]
    fn pipeline_matches_analytic_for_eigenstates() {
        for n in [4, 8] {
            let a = CoefficientFn::fourier(2.0, &[(1.0, 0.0)]).unwrap();
            let op = build_operator_1d(&OperatorSpec1D::single_term(1, a).unwrap(), n).unwrap();
            let tau = choose_tau(n, 1, 2, 1.0);
            let step = UnitaryStep::strang(Arc::new(split_operator(&op).unwrap()), tau);
            let err = splitting_error(&step, &op).unwrap();
            // Eigenvectors of U_Π itself so the input is an exact eigenstate.
            let (phases, vecs) = unitary_eigen(&step.to_dense(), 1.0);
            for m in [16, 64] {
                for col in 0..n {
                    let v: Vec<Complex64> = vecs.column(col).iter().copied().collect();
                    let phase = phases[col];
                    let res = run_phase_estimation(&step, n, 1, &v, &exact(m)).unwrap();
                    let analytic = index_distribution_analytic(phase / tau, tau, m);
                    let diff = res
                        .distribution
                        .iter()
                        .zip(&analytic)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    assert!(diff < 1e-9, "N={n} M={m} col={col}: {diff}");
                }
            }
            assert!(err.max_deviation() > 0.0);
        }
    }

    #[test]
    fn argmax_bin_within_half_bin_for_constant_coefficient() {
        let n = 8;
        let op = build_operator_1d(
            &OperatorSpec1D::single_term(1, CoefficientFn::constant(1.0)).unwrap(),
            n,
        )
        .unwrap();
        let tau = choose_tau(n, 1, 2, 1.0);
        let step = UnitaryStep::strang(Arc::new(split_operator(&op).unwrap()), tau);
        let pairs = eig_dense(&op).unwrap();
        let m = 256;
        let opts = PhaseRunOptions {
            symmetry_hook: true,
            ..exact(m)
        };
        let res = run_phase_estimation(&step, n, 1, &lift(&pairs[0].vector), &opts).unwrap();
        assert_eq!(res.argmax(), 0);
        assert!((res.reflection_overlap.unwrap() - 1.0).abs() < 1e-12);
        let lambda = 4.0 * (n * n) as f64 * (PI / n as f64).sin().powi(2);
        let res = run_phase_estimation(&step, n, 1, &lift(&pairs[1].vector), &exact(m)).unwrap();
        let l = res.argmax() as f64;
        assert!((lambda * tau / (2.0 * PI) - l / m as f64).abs() < 0.5 / m as f64);
        assert!(res.distribution[res.argmax()] >= peak_probability_bound(m));
    }

    #[test]
    fn zero_operator_peaks_at_bin_zero() {
        let op = build_operator_1d(
            &OperatorSpec1D::single_term(1, CoefficientFn::constant(0.0)).unwrap(),
            4,
        )
        .unwrap();
        let step = UnitaryStep::strang(Arc::new(split_operator(&op).unwrap()), 0.1);
        let v = lift(&[0.5, 0.5, -0.5, 0.5]);
        let res = run_phase_estimation(&step, 4, 1, &v, &exact(16)).unwrap();
        assert!((res.distribution[0] - 1.0).abs() < 1e-12);
        assert_eq!(res.decoded[0].lambda, 0.0);
    }

    #[test]
    fn shift_is_subtracted_after_decoding() {
        let op = build_operator_1d(
            &OperatorSpec1D::single_term(1, CoefficientFn::constant(0.0)).unwrap(),
            4,
        )
        .unwrap();
        let tau = 0.1;
        let step = UnitaryStep::strang(Arc::new(split_operator(&op).unwrap()), tau);
        let mu = 2.0 * PI * 3.0 / (16.0 * tau);
        let opts = PhaseRunOptions {
            shift: mu,
            ..exact(16)
        };
        let res = run_phase_estimation(&step, 4, 1, &lift(&[0.5; 4]), &opts).unwrap();
        assert_eq!(res.argmax(), 3);
        assert!(res.decoded[0].lambda.abs() < 1e-9);
    }

    #[test]
    fn sampling_is_seeded_and_needs_qft() {
        let d = vec![0.1, 0.0, 0.6, 0.3];
        let a = sample_bins(&d, 1000, 7);
        assert_eq!(a, sample_bins(&d, 1000, 7));
        assert!(a.iter().all(|&b| b != 1));
        let freq = a.iter().filter(|&&b| b == 2).count() as f64 / 1000.0;
        assert!((freq - 0.6).abs() < 0.05);

        let layout = RegisterLayout::new(4, 1, 4).unwrap();
        let st = StateVector::load_real(&[0.5; 4], layout).unwrap();
        assert!(measure_index(&st, MeasureMode::Exact, 0.1, 0.0).is_err());
    }

    #[test]
    fn mixture_distribution_is_weighted_sum() {
        let n = 8;
        let a = CoefficientFn::fourier(2.0, &[(1.0, 0.0)]).unwrap();
        let op = build_operator_1d(&OperatorSpec1D::single_term(1, a).unwrap(), n).unwrap();
        let step = UnitaryStep::strang(Arc::new(split_operator(&op).unwrap()), 1e-3);
        let (_, vecs) = unitary_eigen(&step.to_dense(), 1.0);
        let w: [f64; 3] = [0.5, 0.3, 0.2];
        let cols = [1, 4, 6];
        let mut mix = vec![Complex64::new(0.0, 0.0); n];
        for (wi, &c) in w.iter().zip(&cols) {
            for (x, z) in mix.iter_mut().enumerate() {
                *z += vecs[(x, c)] * wi.sqrt();
            }
        }
        let m = 32;
        let res = run_phase_estimation(&step, n, 1, &mix, &exact(m)).unwrap();
        let mut expect = vec![0.0; m];
        for (wi, &c) in w.iter().zip(&cols) {
            let v: Vec<Complex64> = vecs.column(c).iter().copied().collect();
            let single = run_phase_estimation(&step, n, 1, &v, &exact(m)).unwrap();
            for (acc, p) in expect.iter_mut().zip(&single.distribution) {
                *acc += wi * p;
            }
        }
        let diff = res
            .distribution
            .iter()
            .zip(&expect)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }
}
