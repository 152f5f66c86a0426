//! Decomposition of the operator into exactly exponentiable parts and the
//! product formulas built from them.

mod error;
mod formula;
mod quantize;

pub use error::{
    choose_tau, split_eigenpairs, splitting_error, unitary_eigen, PairDeviation, SplitEigenpair,
    SplittingError, MAX_SPLIT_DENSE_SIDE,
};
pub use formula::{product_formulas, ProductFormula, Strang, Suzuki4, UnitaryStep, SUZUKI_GAMMA};
pub use quantize::{choose_resolution, quantization_error_bound, Quantization, DEFAULT_BITS};

use crate::error::{Error, Result};
use crate::operator::{unflatten, DiscretizedOperator, Structure};
use crate::sparse::CsrMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

/// Coupling `value` between grid points `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SplitPart {
    Diagonal(Vec<f64>),
    /// Each layer is a set of disjoint pairs; distinct layers commute, so the
    /// exponential of the whole part is the product of layer exponentials.
    Pairs(Vec<Vec<Coupling>>),
}

impl SplitPart {
    /// `ψ ← exp(iθ P) ψ`, exactly.
    pub fn exp_apply(&self, theta: f64, psi: &mut [Complex64]) {
        match self {
            SplitPart::Diagonal(d) => {
                for (a, &v) in psi.iter_mut().zip(d) {
                    *a *= Complex64::from_polar(1.0, theta * v);
                }
            }
            SplitPart::Pairs(layers) => {
                for layer in layers {
                    for c in layer {
                        let (cos, sin) = ((theta * c.value).cos(), (theta * c.value).sin());
                        let (a, b) = (psi[c.i], psi[c.j]);
                        let isin = Complex64::new(0.0, sin);
                        psi[c.i] = a * cos + b * isin;
                        psi[c.j] = a * isin + b * cos;
                    }
                }
            }
        }
    }

    pub fn to_matrix(&self, side: usize) -> CsrMatrix {
        let t: Vec<(usize, usize, f64)> = match self {
            SplitPart::Diagonal(d) => d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
            SplitPart::Pairs(layers) => layers
                .iter()
                .flatten()
                .flat_map(|c| [(c.i, c.j, c.value), (c.j, c.i, c.value)])
                .collect(),
        };
        CsrMatrix::from_triplets(side, side, &t)
    }

    fn map_values(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        Ok(match self {
            SplitPart::Diagonal(d) => {
                SplitPart::Diagonal(d.iter().map(|&v| f(v)).collect::<Result<_>>()?)
            }
            SplitPart::Pairs(layers) => SplitPart::Pairs(
                layers
                    .iter()
                    .map(|l| {
                        l.iter()
                            .map(|c| {
                                Ok(Coupling {
                                    value: f(c.value)?,
                                    ..*c
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitPlan {
    pub parts: Vec<SplitPart>,
    pub side: usize,
    /// `v = max_β Π_α (2 S_{β,α} + 1)`.
    pub bandwidth_volume: usize,
    /// `⌈log₂ v⌉`.
    pub r_qubits: u32,
    /// `N^{2S}`, the magnitude of the entries; quantization works in these units.
    pub scale: f64,
    pub structure: Structure,
}

impl SplitPlan {
    pub fn r(&self) -> usize {
        self.parts.len()
    }

    /// `Σ_p Λ^(p)`.
    pub fn reconstruct(&self) -> CsrMatrix {
        self.parts.iter().fold(
            CsrMatrix::from_triplets(self.side, self.side, &[]),
            |acc, p| acc.add(&p.to_matrix(self.side)),
        )
    }
}

/// Splits the operator into a diagonal part plus groups of pair couplings.
///
/// Off-diagonal entries are grouped by grid offset `δ` (with `δ ~ -δ`). The
/// pairs of one offset form cycles `x, x+δ, x+2δ, ..`; alternating edges of
/// each cycle, walked from its lowest index, give two matchings. Matchings
/// from different offsets share a part when they commute exactly.
pub fn split_operator(op: &DiscretizedOperator) -> Result<SplitPlan> {
    let (v, order) = match op.structure() {
        Structure::Unstructured => return Err(Error::MissingStructure),
        Structure::Bands { half_width } => (2 * half_width + 1, *half_width),
        Structure::Tensor { half_widths } => (
            half_widths
                .iter()
                .map(|t| t.iter().map(|s| 2 * s + 1).product::<usize>())
                .max()
                .unwrap_or(1),
            half_widths
                .iter()
                .map(|t| t.iter().sum::<usize>())
                .max()
                .unwrap_or(0),
        ),
    };
    let a = op.matrix();
    let (n, d, side) = (op.n(), op.dimension(), op.side());

    let mut classes: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
    for (i, j, _) in a.iter() {
        if i < j {
            classes.insert(canonical_offset(&offset(i, j, n, d), n), ());
        }
    }

    let mut layers: Vec<Vec<Coupling>> = Vec::new();
    for delta in classes.keys() {
        let self_inverse = delta.iter().all(|&c| (2 * c) % n == 0);
        let mut colors = [Vec::new(), Vec::new()];
        let mut visited = vec![false; side];
        for start in 0..side {
            if visited[start] {
                continue;
            }
            let mut x = start;
            let mut pos = 0;
            loop {
                visited[x] = true;
                let y = translate(x, delta, n, d);
                let value = a.get(x, y);
                if value != 0.0 {
                    colors[pos % 2].push(Coupling { i: x, j: y, value });
                }
                if self_inverse {
                    visited[y] = true;
                    break;
                }
                x = y;
                pos += 1;
                if x == start {
                    break;
                }
            }
        }
        layers.extend(colors.into_iter().filter(|c| !c.is_empty()));
    }

    // First-fit grouping of commuting layers.
    let mut groups: Vec<(Vec<Vec<Coupling>>, Vec<CsrMatrix>)> = Vec::new();
    for layer in layers {
        let m = SplitPart::Pairs(vec![layer.clone()]).to_matrix(side);
        match groups
            .iter_mut()
            .find(|(_, ms)| ms.iter().all(|o| commute(o, &m)))
        {
            Some((ls, ms)) => {
                ls.push(layer);
                ms.push(m);
            }
            None => groups.push((vec![layer], vec![m])),
        }
    }

    let diag = a.diagonal_values();
    let mut parts = Vec::new();
    if diag.iter().any(|&x| x != 0.0) || groups.is_empty() {
        parts.push(SplitPart::Diagonal(diag));
    }
    parts.extend(groups.into_iter().map(|(ls, _)| SplitPart::Pairs(ls)));
    Ok(SplitPlan {
        parts,
        side,
        bandwidth_volume: v,
        r_qubits: (v as f64).log2().ceil() as u32,
        scale: (n as f64).powi(2 * order as i32),
        structure: op.structure().clone(),
    })
}

fn offset(i: usize, j: usize, n: usize, d: usize) -> Vec<usize> {
    let (a, b) = (unflatten(i, n, d), unflatten(j, n, d));
    a.iter().zip(&b).map(|(x, y)| (y + n - x) % n).collect()
}

fn canonical_offset(delta: &[usize], n: usize) -> Vec<usize> {
    let neg: Vec<usize> = delta.iter().map(|&c| (n - c) % n).collect();
    if neg < delta.to_vec() {
        neg
    } else {
        delta.to_vec()
    }
}

fn translate(x: usize, delta: &[usize], n: usize, d: usize) -> usize {
    let idx = unflatten(x, n, d);
    idx.iter()
        .zip(delta)
        .fold(0, |acc, (a, b)| acc * n + (a + b) % n)
}

fn commute(a: &CsrMatrix, b: &CsrMatrix) -> bool {
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    let scale = a.max_abs() * b.max_abs();
    let diff = ab.add(&ba.filter_map(|_, _, v| -v));
    diff.max_abs() <= 1e-13 * scale
}

/// Cyclic shift of the accumulator along `axis`: amplitude at `x` moves to
/// `x + direction (mod N)`.
pub fn parity_shift(
    amps: &mut [Complex64],
    n: usize,
    dimension: usize,
    axis: usize,
    direction: i8,
) {
    assert!(axis < dimension && (direction == 1 || direction == -1));
    let old = amps.to_vec();
    let stride = n.pow((dimension - 1 - axis) as u32);
    for (x, a) in old.into_iter().enumerate() {
        let coord = (x / stride) % n;
        let shifted = if direction == 1 {
            (coord + 1) % n
        } else {
            (coord + n - 1) % n
        };
        amps[x - coord * stride + shifted * stride] = a;
    }
}
