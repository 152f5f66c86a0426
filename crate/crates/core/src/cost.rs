//! Formula instantiations of the qubit and gate counts of the quantum
//! algorithm and its classical baseline. Constants default to 1.

use crate::error::{Error, Result};
use serde::{Serialize, Serializer};
use std::fmt;

/// A count held as `log₂`; shown numerically below `2^63`, as a power of two
/// above.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Log2Count(pub f64);

impl Log2Count {
    pub fn log2(self) -> f64 {
        self.0
    }

    pub fn value(self) -> Option<f64> {
        (self.0 < 63.0).then(|| self.0.exp2())
    }
}

impl fmt::Display for Log2Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v:.6e}"),
            None => write!(f, "2^{:.4}", self.0),
        }
    }
}

impl Serialize for Log2Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Log2Count", 2)?;
        st.serialize_field("log2", &self.0)?;
        st.serialize_field("display", &self.to_string())?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CostInputs {
    pub n: u64,
    pub dimension: u32,
    pub s: u32,
    pub nu: u32,
    /// Polylog compilation exponent.
    pub c: f64,
    /// `log₂ M` when supplied; derived otherwise.
    pub log2_m: Option<u32>,
    pub n0: u64,
    /// Multiplies `N^{2(S+1)(1+1/ν)}` when deriving `M`.
    pub m_constant: f64,
    /// Coefficient bits plus threshold ancilla.
    pub ancillas: u32,
}

impl CostInputs {
    pub fn new(n: u64, dimension: u32, s: u32, nu: u32) -> Self {
        Self {
            n,
            dimension,
            s,
            nu,
            c: 3.0,
            log2_m: None,
            n0: 2,
            m_constant: 1.0,
            ancillas: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n0 < 2 || self.dimension == 0 {
            return Err(Error::Spec("cost inputs need N, N0 >= 2 and D >= 1".into()));
        }
        if self.nu != 2 && self.nu != 4 {
            return Err(Error::Spec(format!("nu must be 2 or 4, got {}", self.nu)));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.c > 0.0) || !(self.m_constant > 0.0) {
            return Err(Error::Spec("c and the M constant must be positive".into()));
        }
        Ok(())
    }

    /// `2(S+1)(1+1/ν)` as the exact fraction `(2(S+1)(ν+1), ν)`.
    pub fn threshold_fraction(&self) -> (u64, u64) {
        (
            2 * (self.s as u64 + 1) * (self.nu as u64 + 1),
            self.nu as u64,
        )
    }

    pub fn threshold_d(&self) -> f64 {
        let (p, q) = self.threshold_fraction();
        p as f64 / q as f64
    }

    fn log2_n(&self) -> f64 {
        (self.n as f64).log2()
    }
}

/// `⌈log₂(constant · N^{2(S+1)(1+1/ν)})⌉`, i.e. `M` rounded up to a power of two.
pub fn derive_m(n: u64, s: u32, nu: u32, constant: f64) -> u32 {
    let e = 2.0 * (s as f64 + 1.0) * (1.0 + 1.0 / nu as f64);
    let target = constant.log2() + e * (n as f64).log2();
    (target - 1e-9).ceil().max(1.0) as u32
}

fn formula_m(inputs: &CostInputs) -> Log2Count {
    match inputs.log2_m {
        Some(k) => Log2Count(k as f64),
        None => Log2Count(inputs.m_constant.log2() + inputs.threshold_d() * inputs.log2_n()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QubitCount {
    pub accumulator: u32,
    pub index: u32,
    pub ancillas: u32,
    pub total: u32,
}

/// `D·log₂N + log₂M + ancillas`, with `⌈log₂N⌉` qubits per axis.
pub fn qubit_count(inputs: &CostInputs) -> QubitCount {
    let per_axis = (inputs.n as f64).log2().ceil() as u32;
    let accumulator = inputs.dimension * per_axis;
    let index = inputs
        .log2_m
        .unwrap_or_else(|| derive_m(inputs.n, inputs.s, inputs.nu, inputs.m_constant));
    QubitCount {
        accumulator,
        index,
        ancillas: inputs.ancillas,
        total: accumulator + index + inputs.ancillas,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateCounts {
    /// `ℵ_Q = M log^c N`.
    pub quantum: Log2Count,
    /// `ℵ_C = N^D log N`.
    pub classical: Log2Count,
    /// `ℵ_C / ℵ_Q`.
    pub ratio: Log2Count,
}

pub fn gate_counts(inputs: &CostInputs) -> GateCounts {
    let ln = inputs.log2_n();
    let loglog = ln.log2();
    let quantum = formula_m(inputs).0 + inputs.c * loglog;
    let classical = inputs.dimension as f64 * ln + loglog;
    GateCounts {
        quantum: Log2Count(quantum),
        classical: Log2Count(classical),
        ratio: Log2Count(classical - quantum),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotationAccuracy {
    /// `1/N^{S+3}`.
    pub absolute: f64,
    /// `1/N^{S+1}`, the smallest phase the rotations must resolve.
    pub phase_floor: f64,
    /// `1/N²`, the relative eigenvalue accuracy this buys.
    pub relative_eigenvalue: f64,
}

pub fn rotation_accuracy(n: u64, s: u32) -> RotationAccuracy {
    let n = n as f64;
    RotationAccuracy {
        absolute: n.powi(-(s as i32 + 3)),
        phase_floor: n.powi(-(s as i32 + 1)),
        relative_eigenvalue: n.powi(-2),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InitialStateCost {
    /// `N0^D log N0` classical operations for the coarse solve.
    pub classical_ops: Log2Count,
    /// `N0^D` operations to load it.
    pub loading_ops: Log2Count,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub inputs: CostInputs,
    pub log2_m: u32,
    pub qubits: QubitCount,
    pub gates: GateCounts,
    /// Classical memory, `N^D` values.
    pub bits_classical: Log2Count,
    pub threshold_d: f64,
    pub advantage: bool,
    /// E.g. `D/3 > 2` for three-dimensional particles.
    pub particle_statement: String,
    pub min_particles: u64,
    pub rotation: RotationAccuracy,
    pub initial_state: InitialStateCost,
    pub constants_note: &'static str,
}

pub fn cost_report(inputs: &CostInputs) -> Result<CostReport> {
    inputs.validate()?;
    let (p, q) = inputs.threshold_fraction();
    let advantage = inputs.dimension as u64 * q > p;
    // Particles in three dimensions: D/3 > p/(3q).
    let (pn, pd) = reduce(p, 3 * q);
    let particle_statement = if pd == 1 {
        format!("D/3 > {pn}")
    } else {
        format!("D/3 > {pn}/{pd}")
    };
    let min_particles = pn / pd + 1;
    let log2_n0 = (inputs.n0 as f64).log2();
    let d = inputs.dimension as f64;
    Ok(CostReport {
        inputs: inputs.clone(),
        log2_m: qubit_count(inputs).index,
        qubits: qubit_count(inputs),
        gates: gate_counts(inputs),
        bits_classical: Log2Count(d * inputs.log2_n()),
        threshold_d: inputs.threshold_d(),
        advantage,
        particle_statement,
        min_particles,
        rotation: rotation_accuracy(inputs.n, inputs.s),
        initial_state: InitialStateCost {
            classical_ops: Log2Count(d * log2_n0 + log2_n0.log2()),
            loading_ops: Log2Count(d * log2_n0),
        },
        constants_note: "asymptotic constants set to 1; counts are formula instantiations",
    })
}

fn reduce(a: u64, b: u64) -> (u64, u64) {
    let g = gcd(a, b);
    (a / g, b / g)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
