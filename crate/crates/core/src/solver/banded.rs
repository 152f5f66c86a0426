//! Direct solver for `(A - μI) x = r` where `A` is a periodic banded (or
//! Kronecker-banded) symmetric matrix.
//!
//! Periodic wraparound puts entries in the far corners. Those are confined to
//! a border of `w` trailing indices; the interior block is banded with
//! half-width `b` and factored by band LU with partial pivoting, and the
//! border is eliminated through a dense `w × w` Schur complement. Factor cost
//! is `O(n b (b + w))`, each solve `O(n (b + w))`.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use nalgebra::DMatrix;

/// Band LU with partial pivoting (LAPACK `gbtrf` layout without the L swap).
struct BandLu {
    n: usize,
    b: usize,
    /// Row `i` stores columns `i - b ..= i + 2b`.
    rows: Vec<Vec<f64>>,
    /// Multipliers applied to rows `k+1 ..= k+b` at step `k`.
    lower: Vec<Vec<f64>>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn width(b: usize) -> usize {
        3 * b + 1
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        j + self.b - i
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][self.slot(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.rows[i][s] = v;
    }

    fn factor(
        n: usize,
        b: usize,
        entries: impl Iterator<Item = (usize, usize, f64)>,
        tiny: f64,
        ops: &mut u64,
    ) -> Result<Self, ()> {
        let mut lu = Self {
            n,
            b,
            rows: vec![vec![0.0; Self::width(b)]; n],
            lower: vec![Vec::new(); n],
            pivots: vec![0; n],
        };
        for (i, j, v) in entries {
            let s = lu.slot(i, j);
            lu.rows[i][s] += v;
        }
        for k in 0..n {
            let last_row = (k + b).min(n - 1);
            let last_col = (k + 2 * b).min(n - 1);
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for r in k + 1..=last_row {
                let v = lu.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= tiny {
                return Err(());
            }
            lu.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let a = lu.get(k, j);
                    let c = lu.get(p, j);
                    lu.set(k, j, c);
                    lu.set(p, j, a);
                }
            }
            let pivot = lu.get(k, k);
            let mut mult = Vec::with_capacity(last_row - k);
            for r in k + 1..=last_row {
                let m = lu.get(r, k) / pivot;
                mult.push(m);
                if m == 0.0 {
                    continue;
                }
                lu.set(r, k, 0.0);
                for j in k + 1..=last_col {
                    let v = lu.get(r, j) - m * lu.get(k, j);
                    lu.set(r, j, v);
                }
                *ops += 2 * (last_col - k) as u64;
            }
            lu.lower[k] = mult;
        }
        Ok(lu)
    }

    fn solve_in_place(&self, x: &mut [f64], ops: &mut u64) {
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for (r, m) in self.lower[k].iter().enumerate() {
                x[k + 1 + r] -= m * xk;
            }
            *ops += 2 * self.lower[k].len() as u64;
        }
        for k in (0..n).rev() {
            let last_col = (k + 2 * self.b).min(n - 1);
            let mut acc = x[k];
            for j in k + 1..=last_col {
                acc -= self.get(k, j) * x[j];
            }
            x[k] = acc / self.get(k, k);
            *ops += 2 * (last_col - k) as u64 + 1;
        }
    }
}

enum Factorization {
    Bordered {
        interior: BandLu,
        /// Border couplings `A_EI` as `(border row, interior col, value)`.
        border_rows: Vec<Vec<(usize, f64)>>,
        /// `A_II⁻¹ A_IE`, one column per border index.
        z: Vec<Vec<f64>>,
        schur: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    },
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Factored `A - μI`, counting floating-point operations as it goes.
pub struct ShiftedSolver {
    n: usize,
    m: usize,
    fact: Factorization,
    ops: u64,
}

/// Half-bandwidth `b` and border width `w` for the bordered layout.
pub(crate) fn band_layout(a: &CsrMatrix) -> (usize, usize) {
    let n = a.rows();
    let mut b = 0;
    let mut first_far = n;
    for (i, j, _) in a.iter() {
        let d = i.abs_diff(j);
        if 2 * d <= n {
            b = b.max(d);
        } else {
            first_far = first_far.min(i.max(j));
        }
    }
    (b, n - first_far)
}

impl ShiftedSolver {
    pub fn new(a: &CsrMatrix, mu: f64) -> Result<Self> {
        let n = a.rows();
        let scale = a.max_abs().max(mu.abs()).max(f64::MIN_POSITIVE);
        let tiny = 1e-14 * scale;
        let mut ops = 0u64;
        let (b, w) = band_layout(a);
        let mut entries: Vec<(usize, usize, f64)> = a.iter().collect();
        entries.extend((0..n).map(|i| (i, i, -mu)));

        if n < 8 || 2 * (b + w) >= n {
            let mut d = DMatrix::zeros(n, n);
            for &(i, j, v) in &entries {
                d[(i, j)] += v;
            }
            let lu = d.lu();
            let min_pivot = lu
                .u()
                .diagonal()
                .iter()
                .fold(f64::INFINITY, |m: f64, v: &f64| m.min(v.abs()));
            if min_pivot <= tiny {
                return Err(Error::SingularShift(mu));
            }
            ops += (2 * n * n * n / 3) as u64;
            return Ok(Self {
                n,
                m: n,
                fact: Factorization::Dense(lu),
                ops,
            });
        }

        let m = n - w;
        let interior = BandLu::factor(
            m,
            b,
            entries.iter().copied().filter(|&(i, j, _)| i < m && j < m),
            tiny,
            &mut ops,
        )
        .map_err(|_| Error::SingularShift(mu))?;

        let mut border_rows = vec![Vec::new(); w];
        let mut border_block = DMatrix::zeros(w, w);
        let mut z = vec![vec![0.0; m]; w];
        for &(i, j, v) in &entries {
            match (i >= m, j >= m) {
                (true, true) => border_block[(i - m, j - m)] += v,
                (true, false) => border_rows[i - m].push((j, v)),
                (false, true) => z[j - m][i] += v,
                _ => {}
            }
        }
        for col in z.iter_mut() {
            interior.solve_in_place(col, &mut ops);
        }
        // S = A_EE - A_EI Z
        for (e, row) in border_rows.iter().enumerate() {
            for (f, zcol) in z.iter().enumerate() {
                let s: f64 = row.iter().map(|&(j, v)| v * zcol[j]).sum();
                border_block[(e, f)] -= s;
            }
            ops += 2 * (row.len() * w) as u64;
        }
        let schur = border_block.lu();
        if w > 0 {
            let min_pivot = schur
                .u()
                .diagonal()
                .iter()
                .fold(f64::INFINITY, |m: f64, v: &f64| m.min(v.abs()));
            if min_pivot <= tiny {
                return Err(Error::SingularShift(mu));
            }
        }
        ops += (2 * w * w * w / 3) as u64;
        Ok(Self {
            n,
            m,
            fact: Factorization::Bordered {
                interior,
                border_rows,
                z,
                schur,
            },
            ops,
        })
    }

    pub fn solve(&mut self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.n);
        match &self.fact {
            Factorization::Dense(lu) => {
                self.ops += 2 * (self.n * self.n) as u64;
                let v = nalgebra::DVector::from_column_slice(r);
                lu.solve(&v)
                    .expect("factorization checked nonsingular")
                    .as_slice()
                    .to_vec()
            }
            Factorization::Bordered {
                interior,
                border_rows,
                z,
                schur,
            } => {
                let m = self.m;
                let w = self.n - m;
                let mut y = r[..m].to_vec();
                interior.solve_in_place(&mut y, &mut self.ops);
                if w == 0 {
                    return y;
                }
                let t = nalgebra::DVector::from_iterator(
                    w,
                    border_rows
                        .iter()
                        .enumerate()
                        .map(|(e, row)| r[m + e] - row.iter().map(|&(j, v)| v * y[j]).sum::<f64>()),
                );
                let xe = schur.solve(&t).expect("factorization checked nonsingular");
                for (f, zcol) in z.iter().enumerate() {
                    let c = xe[f];
                    for (yi, zi) in y.iter_mut().zip(zcol) {
                        *yi -= zi * c;
                    }
                }
                self.ops += (2 * m * w + 2 * w * w) as u64
                    + border_rows.iter().map(|r| 2 * r.len() as u64).sum::<u64>();
                y.extend(xe.iter());
                y
            }
        }
    }

    /// Floating-point operations spent so far (factor plus solves).
    pub fn ops(&self) -> u64 {
        self.ops
    }
}
