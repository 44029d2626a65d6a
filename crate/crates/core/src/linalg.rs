//! Small dense linear algebra: compensated summation, a square row-major
//! matrix and a Cholesky factorization with iterative refinement.
//!
//! The markets handled here have a handful of assets, so everything is
//! written for clarity and accuracy rather than blocking or SIMD.

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Streaming form of [`compensated_sum`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated inner product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// xᵀ A y
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular factor `L` with `A = L Lᵀ`, together with a copy of `A`
/// used to refine solutions.
#[derive(Debug, Clone)]
pub struct Cholesky {
    a: Matrix,
    l: Matrix,
}

/// Relative pivot tolerance; a pivot below `PIVOT_TOL * trace / n` is
/// treated as a rank deficiency.
pub const PIVOT_TOL: f64 = 1e-10;

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.dim();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let tolerance = PIVOT_TOL * (a.trace() / n as f64).abs();
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let d = a[(j, j)] - compensated_sum((0..j).map(|k| l[(j, k)] * l[(j, k)]));
            if d.is_nan() || d <= tolerance {
                return Err(Error::NotPositiveDefinite { row: j, pivot: d, tolerance });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let s = a[(i, j)] - compensated_sum((0..j).map(|k| l[(i, k)] * l[(j, k)]));
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { a: a.clone(), l })
    }

    /// Cheap lower estimate of the 2-norm condition number, `(max l_ii / min l_ii)²`.
    pub fn condition_estimate(&self) -> f64 {
        let diag = (0..self.l.dim()).map(|i| self.l[(i, i)]);
        let (lo, hi) = diag.fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        (hi / lo).powi(2)
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s = b[i] - compensated_sum((0..i).map(|k| self.l[(i, k)] * y[k]));
            y[i] = s / self.l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s = y[i] - compensated_sum(((i + 1)..n).map(|k| self.l[(k, i)] * x[k]));
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b` with two rounds of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.l.dim(), "right-hand side length");
        let mut x = self.substitute(b);
        for _ in 0..2 {
            let ax = self.a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.substitute(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    }
}
