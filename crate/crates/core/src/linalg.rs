//! Small dense row-major matrices and the few routines the channel algebra
//! needs: products, Gauss-Jordan inversion, a QR right inverse and singular
//! values.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch("data length does not match rows*cols"));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch("ragged rows"));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch("inner dimensions differ"));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest absolute entrywise difference; `None` if shapes differ.
    pub fn max_abs_diff(&self, other: &Matrix) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())),
        )
    }

    /// Inverse of a square matrix by Gauss-Jordan elimination with partial
    /// pivoting. Fails with `RankDeficient` when a pivot vanishes relative to
    /// the matrix scale.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap_or(col);
            let pivot = a[(pivot_row, col)];
            if pivot.abs() <= scale * 1e-14 {
                return Err(Error::RankDeficient { min_singular: pivot.abs() });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let p = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= p;
                inv[(col, c)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a[(r, c)] -= f * a[(col, c)];
                    inv[(r, c)] -= f * inv[(col, c)];
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Right inverse `Aᵀ(AAᵀ)⁻¹` of a wide full-row-rank matrix, evaluated
    /// through a Householder QR factorization `Aᵀ = QR` as `Q R⁻ᵀ`.
    pub fn right_pseudo_inverse(&self) -> Result<Matrix> {
        let (n, m) = (self.rows, self.cols);
        if n > m {
            return Err(Error::ShapeMismatch("right inverse needs rows <= cols"));
        }
        // Work on Aᵀ (m×n), reflecting columns into upper-triangular R.
        let mut r = self.transpose();
        let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            let norm = libm::sqrt((j..m).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>());
            let mut v: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 > 0.0 {
                for c in j..n {
                    let dot: f64 = (j..m).map(|i| v[i - j] * r[(i, c)]).sum();
                    let f = 2.0 * dot / vnorm2;
                    for i in j..m {
                        r[(i, c)] -= f * v[i - j];
                    }
                }
            }
            reflectors.push(v);
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for j in 0..n {
            if r[(j, j)].abs() <= scale * 1e-15 {
                return Err(Error::RankDeficient { min_singular: r[(j, j)].abs() });
            }
        }
        // Thin Q: apply the reflectors in reverse to the first n unit vectors.
        let mut q = Matrix::zeros(m, n);
        for c in 0..n {
            q[(c, c)] = 1.0;
        }
        for j in (0..n).rev() {
            let v = &reflectors[j];
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            for c in 0..n {
                let dot: f64 = (j..m).map(|i| v[i - j] * q[(i, c)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in j..m {
                    q[(i, c)] -= f * v[i - j];
                }
            }
        }
        // X = Q R⁻ᵀ, i.e. solve X Rᵀ = Q row by row (R is upper triangular).
        let mut x = Matrix::zeros(m, n);
        for row in 0..m {
            for c in (0..n).rev() {
                let mut acc = q[(row, c)];
                for t in c + 1..n {
                    acc -= x[(row, t)] * r[(c, t)];
                }
                x[(row, c)] = acc / r[(c, c)];
            }
        }
        Ok(x)
    }

    /// Singular values in descending order, by one-sided Jacobi rotations on
    /// the rows (or columns, whichever are fewer). Accurate to a small multiple
    /// of machine precision relative to the largest singular value.
    pub fn singular_values(&self) -> Vec<f64> {
        // Orthogonalize the shorter dimension's vectors.
        let (count, len, mut vecs) = if self.rows <= self.cols {
            (self.rows, self.cols, self.data.clone())
        } else {
            (self.cols, self.rows, self.transpose().data)
        };
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..count {
                for q in (p + 1)..count {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for t in 0..len {
                        let x = vecs[p * len + t];
                        let y = vecs[q * len + t];
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    let t = sign / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = c * t;
                    for i in 0..len {
                        let x = vecs[p * len + i];
                        let y = vecs[q * len + i];
                        vecs[p * len + i] = c * x - s * y;
                        vecs[q * len + i] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = (0..count)
            .map(|p| libm::sqrt(vecs[p * len..(p + 1) * len].iter().map(|v| v * v).sum::<f64>()))
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}
