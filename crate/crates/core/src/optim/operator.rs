use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Objective;
use crate::error::{Error, Result};
use crate::tensor::Matrix;
use crate::vector;

/// Apply-only linear operator on `R^n`.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    /// Dense matrix of the operator, column by column.
    fn to_dense(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, m.col_mut(j));
            e[j] = 0.0;
        }
        m
    }
}

impl LinearOperator for Matrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                vector::axpy(*xj, self.col(j), out);
            }
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from `(row, col, value)` triplets; duplicates add.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(t) = triplets.iter().find(|t| t.0 >= n || t.1 >= n) {
            return Err(Error::dims("CsrMatrix::from_triplets", format!("entry ({}, {}) outside {n}x{n}", t.0, t.1)));
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn from_dense(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims("CsrMatrix::from_dense", format!("{}x{}", m.rows(), m.cols())));
        }
        let mut t = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m.get(i, j) != 0.0 {
                    t.push((i, j, m.get(i, j)));
                }
            }
        }
        Self::from_triplets(m.rows(), t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(col, value)` pairs of row `i` in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).find(|(c, _)| *c == i).map_or(0.0, |(_, v)| v)).collect()
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, v) in self.row(i) {
                acc += v * x[c];
            }
            *o = acc;
        }
    }
}

/// `f(x) = ½ xᵀAx − bᵀx` with gradient `g = Ax − b`.
pub struct QuadraticProblem {
    a: Box<dyn LinearOperator>,
    b: Vec<f64>,
}

impl core::fmt::Debug for QuadraticProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("QuadraticProblem").field("n", &self.b.len()).finish()
    }
}

impl QuadraticProblem {
    /// Wraps `A` and `b`, rejecting operators that fail a sampled symmetry probe.
    pub fn new(a: Box<dyn LinearOperator>, b: Vec<f64>) -> Result<Self> {
        if a.dim() != b.len() {
            return Err(Error::dims("QuadraticProblem", format!("operator dim {} vs rhs {}", a.dim(), b.len())));
        }
        let q = Self { a, b };
        q.check_symmetry(4, 0x5eed)?;
        Ok(q)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        self.a.as_ref()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.apply(x)
    }

    pub fn residual_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.a.apply(x);
        vector::axpy(-1.0, &self.b, &mut g);
        g
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let ax = self.a.apply(x);
        0.5 * vector::dot(x, &ax) - vector::dot(&self.b, x)
    }

    /// Checks `|xᵀAy − yᵀAx| ≤ 1e-12 ‖x‖‖y‖‖A‖est` on random Gaussian probes.
    pub fn check_symmetry(&self, probes: usize, seed: u64) -> Result<()> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..probes {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let ax = self.a.apply(&x);
            let ay = self.a.apply(&y);
            let (nx, ny) = (vector::norm(&x), vector::norm(&y));
            let est = (vector::norm(&ax) / nx).max(vector::norm(&ay) / ny);
            let gap = (vector::dot(&y, &ax) - vector::dot(&x, &ay)).abs();
            if gap > 1e-12 * nx * ny * est.max(f64::MIN_POSITIVE) {
                return Err(Error::param("A", format!("operator is not symmetric (probe gap {gap:e})")));
            }
        }
        Ok(())
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.objective(x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.residual_gradient(x))
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let g = self.residual_gradient(x);
        // xᵀAx = xᵀ(g + b)
        let f = 0.5 * vector::dot(x, &g) - 0.5 * vector::dot(&self.b, x);
        Ok((f, g))
    }

    fn exact_step(&self, _x: &[f64], g: &[f64], p: &[f64]) -> Option<Result<f64>> {
        Some(super::linesearch::exact_step_from_gradient(self.operator(), g, p))
    }
}
