//! Small dense linear-algebra pieces shared by the spectral and kriging code.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `V = L L'`, computed without pivoting or
/// regularization. A non-positive pivot aborts the factorization.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row-major lower triangle, full n x n storage
    l: Vec<f64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl Cholesky {
    pub fn factor(v: MatRef<'_, f64>) -> Result<Self> {
        let n = v.nrows();
        if v.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.ncols(),
            });
        }
        let mut l = vec![0.0; n * n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let (row_i, row_j) = if i == j {
                    let r = &l[i * n..i * n + j];
                    (r, r)
                } else {
                    let (head, tail) = l.split_at(i * n);
                    (&tail[..j], &head[j * n..j * n + j])
                };
                let s = v[(i, j)] - dot(row_i, row_j);
                if i == j {
                    if s.is_nan() || s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { index: i, value: s });
                    }
                    min_pivot = min_pivot.min(s);
                    max_pivot = max_pivot.max(s);
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self {
            n,
            l,
            min_pivot,
            max_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[i * self.n + j]
        }
    }

    /// Ratio of the largest to the smallest squared diagonal of `L`
    /// (the Schur-complement pivots); a cheap ill-conditioning signal.
    pub fn pivot_ratio(&self) -> f64 {
        self.max_pivot / self.min_pivot
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            b[i] = (b[i] - dot(row, &b[..i])) / self.l[i * n + i];
        }
    }

    /// Solves `V x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        self.solve_lower_in_place(b);
        // L' x = y, sweeping rows of L so memory access stays contiguous
        for i in (0..n).rev() {
            b[i] /= self.l[i * n + i];
            let xi = b[i];
            for (bk, lik) in b[..i].iter_mut().zip(&self.l[i * n..i * n + i]) {
                *bk -= lik * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `L^{-1} B` column by column.
    pub fn solve_lower_mat(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        let mut out = b.to_owned();
        let mut col = vec![0.0; self.n];
        for j in 0..b.ncols() {
            for i in 0..self.n {
                col[i] = out[(i, j)];
            }
            self.solve_lower_in_place(&mut col);
            for i in 0..self.n {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    /// `V^{-1} B` column by column.
    pub fn solve_mat(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        let mut out = b.to_owned();
        let mut col = vec![0.0; self.n];
        for j in 0..b.ncols() {
            for i in 0..self.n {
                col[i] = out[(i, j)];
            }
            self.solve_in_place(&mut col);
            for i in 0..self.n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Four-way unrolled dot product; keeps the Cholesky inner loop vectorizable.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

/// A symmetric linear operator `Y -> V Y` applied to blocks of columns.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, block: MatRef<'_, f64>) -> Mat<f64>;
}

impl SymmetricOperator for Mat<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, block: MatRef<'_, f64>) -> Mat<f64> {
        self * block
    }
}

impl SymmetricOperator for MatRef<'_, f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, block: MatRef<'_, f64>) -> Mat<f64> {
        *self * block
    }
}

pub(crate) fn trace(v: MatRef<'_, f64>) -> f64 {
    (0..v.nrows().min(v.ncols())).map(|i| v[(i, i)]).sum()
}

pub(crate) fn frobenius(v: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            s += v[(i, j)] * v[(i, j)];
        }
    }
    s.sqrt()
}

pub(crate) fn max_asymmetry(v: MatRef<'_, f64>) -> f64 {
    let n = v.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((v[(i, j)] - v[(j, i)]).abs());
        }
    }
    worst
}
