use crate::error::{Error, Result};
use crate::operator::unflatten;
use crate::splitting::{parity_shift, UnitaryStep};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

/// Largest statevector the simulator accepts, `N^D · M`.
pub const MAX_AMPLITUDES: usize = 1 << 24;

const NORM_TOL: f64 = 1e-10;

/// Index register in the most significant position: amplitude `j · N^D + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    pub n: usize,
    pub dimension: usize,
    pub m: usize,
}

impl RegisterLayout {
    pub fn new(n: usize, dimension: usize, m: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::GridSize(n));
        }
        if !m.is_power_of_two() || m < 2 {
            return Err(Error::Register(format!(
                "M = {m} must be a power of two >= 2"
            )));
        }
        let total = (n as u128).pow(dimension as u32) * m as u128;
        if total > MAX_AMPLITUDES as u128 {
            return Err(Error::TooLarge {
                what: "statevector (N^D * M amplitudes)",
                required: total,
                limit: MAX_AMPLITUDES as u128,
            });
        }
        Ok(Self { n, dimension, m })
    }

    pub fn accumulator_qubits(&self) -> u32 {
        self.dimension as u32 * self.n.trailing_zeros()
    }

    pub fn index_qubits(&self) -> u32 {
        self.m.trailing_zeros()
    }

    pub fn accumulator_len(&self) -> usize {
        self.n.pow(self.dimension as u32)
    }

    pub fn len(&self) -> usize {
        self.accumulator_len() * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Loaded,
    Superposed,
    Evolved,
    Transformed,
}

#[derive(Debug, Clone)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
    stage: Stage,
}

impl StateVector {
    /// Accumulator holds `vector`; index register in `|0⟩`.
    pub fn load_accumulator(vector: &[Complex64], layout: RegisterLayout) -> Result<Self> {
        let s = layout.accumulator_len();
        if vector.len() != s {
            return Err(Error::Dimension {
                expected: s,
                got: vector.len(),
            });
        }
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.len()];
        amps[..s].copy_from_slice(vector);
        Ok(Self {
            layout,
            amps,
            stage: Stage::Loaded,
        })
    }

    pub fn load_real(vector: &[f64], layout: RegisterLayout) -> Result<Self> {
        let v: Vec<Complex64> = vector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::load_accumulator(&v, layout)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn slices_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &mut [Complex64])> {
        let s = self.layout.accumulator_len();
        self.amps.par_chunks_mut(s).enumerate()
    }

    /// Hadamards on the index register: uniform `1/√M` over index values.
    pub fn index_superposition(&mut self) -> Result<()> {
        let s = self.layout.accumulator_len();
        if self.stage != Stage::Loaded || self.amps[s..].iter().any(|z| z.norm_sqr() != 0.0) {
            return Err(Error::Register("index register is not in |0>".into()));
        }
        let w = 1.0 / (self.layout.m as f64).sqrt();
        let first: Vec<Complex64> = self.amps[..s].iter().map(|z| z * w).collect();
        self.slices_mut()
            .for_each(|(_, slice)| slice.copy_from_slice(&first));
        self.stage = Stage::Superposed;
        Ok(())
    }

    /// Slice `j` gets `e^{ijμτ} U_Π^j`.
    pub fn controlled_powers(&mut self, step: &UnitaryStep, shift: f64) -> Result<()> {
        self.check_evolvable(step)?;
        let phase = shift * step.tau();
        self.slices_mut().for_each(|(j, slice)| {
            step.apply_power(slice, j);
            if phase != 0.0 {
                let g = Complex64::from_polar(1.0, phase * j as f64);
                slice.iter_mut().for_each(|z| *z *= g);
            }
        });
        self.stage = Stage::Evolved;
        Ok(())
    }

    /// The circuit form: for each threshold `t = 1..M-1`, apply `U_Π` to
    /// every slice `j ≥ t`. Same result as [`Self::controlled_powers`].
    pub fn controlled_powers_threshold(&mut self, step: &UnitaryStep) -> Result<()> {
        self.check_evolvable(step)?;
        for t in 1..self.layout.m {
            self.slices_mut()
                .filter(|(j, _)| *j >= t)
                .for_each(|(_, slice)| step.apply(slice));
        }
        self.stage = Stage::Evolved;
        Ok(())
    }

    fn check_evolvable(&self, step: &UnitaryStep) -> Result<()> {
        if self.stage != Stage::Superposed {
            return Err(Error::Register(format!(
                "controlled powers need a superposed index, state is {:?}",
                self.stage
            )));
        }
        if step.side() != self.layout.accumulator_len() {
            return Err(Error::Dimension {
                expected: self.layout.accumulator_len(),
                got: step.side(),
            });
        }
        Ok(())
    }

    /// `|m'⟩ → M^{-1/2} Σ_l e^{-2πi l m'/M} |l⟩` on the index register.
    pub fn qft_index(&mut self) {
        self.index_transform(false);
        self.stage = Stage::Transformed;
    }

    /// Inverse of [`Self::qft_index`].
    pub fn inverse_qft_index(&mut self) {
        self.index_transform(true);
        self.stage = Stage::Evolved;
    }

    fn index_transform(&mut self, inverse: bool) {
        let (s, m) = (self.layout.accumulator_len(), self.layout.m);
        let mut planner = FftPlanner::new();
        let fft = if inverse {
            planner.plan_fft_inverse(m)
        } else {
            planner.plan_fft_forward(m)
        };
        let scale = 1.0 / (m as f64).sqrt();
        // Transpose so each accumulator point's index amplitudes are contiguous.
        let mut cols = vec![Complex64::new(0.0, 0.0); s * m];
        for j in 0..m {
            for x in 0..s {
                cols[x * m + j] = self.amps[j * s + x];
            }
        }
        cols.par_chunks_mut(m).for_each(|line| {
            fft.process(line);
            line.iter_mut().for_each(|z| *z *= scale);
        });
        for x in 0..s {
            for j in 0..m {
                self.amps[j * s + x] = cols[x * m + j];
            }
        }
    }

    /// Probability of each index bin.
    pub fn index_marginal(&self) -> Vec<f64> {
        let s = self.layout.accumulator_len();
        self.amps
            .chunks(s)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Renormalized accumulator slice left behind by measuring `bin`.
    pub fn collapse(&self, bin: usize) -> Result<Vec<Complex64>> {
        let s = self.layout.accumulator_len();
        if bin >= self.layout.m {
            return Err(Error::Register(format!("bin {bin} out of range")));
        }
        let slice = &self.amps[bin * s..(bin + 1) * s];
        let norm = slice.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Register(format!("bin {bin} has zero probability")));
        }
        Ok(slice.iter().map(|z| z / norm).collect())
    }

    /// Cyclic shift of the accumulator in every index slice.
    pub fn parity_shift(&mut self, axis: usize, direction: i8) {
        let (n, d) = (self.layout.n, self.layout.dimension);
        self.slices_mut()
            .for_each(|(_, slice)| parity_shift(slice, n, d, axis, direction));
    }
}

/// `|⟨ψ|Rψ⟩|` where `R` reflects every axis, `x → -x mod N`.
pub fn reflection_overlap(psi: &[Complex64], n: usize, dimension: usize) -> f64 {
    let reflected = |x: usize| -> usize {
        unflatten(x, n, dimension)
            .iter()
            .fold(0, |acc, &c| acc * n + (n - c) % n)
    };
    psi.iter()
        .enumerate()
        .map(|(x, z)| z.conj() * psi[reflected(x)])
        .sum::<Complex64>()
        .norm()
}
