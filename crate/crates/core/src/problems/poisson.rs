use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::optim::{CsrMatrix, QuadraticProblem};

/// Unit square with mesh spacing `h = 1 / intervals`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoissonSpec {
    pub intervals: usize,
}

impl PoissonSpec {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::param("intervals", "need at least two intervals per side"));
        }
        Ok(Self { intervals })
    }

    /// Accepts `h` when `1/h` is an integer to within 1e-9.
    pub fn from_spacing(h: f64) -> Result<Self> {
        let inv = 1.0 / h;
        let n = libm::round(inv);
        if !(h > 0.0) || (inv - n).abs() > 1e-9 * n {
            return Err(Error::param("h", "mesh spacing must divide 1"));
        }
        Self::new(n as usize)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    /// Interior nodes per side.
    pub fn m(&self) -> usize {
        self.intervals - 1
    }

    pub fn dim(&self) -> usize {
        self.m() * self.m()
    }
}

fn rhs(x: f64, y: f64) -> f64 {
    2.0 * ((1.0 - 6.0 * x * x) * y * y * (1.0 - y * y) + (1.0 - 6.0 * y * y) * x * x * (1.0 - x * x))
}

/// Five-point discretization of `−Δu = −s(x, y)` with zero Dirichlet data,
/// where `s` is the source of `Δu = s` whose exact solution is
/// `u = (x² − x⁴)(y² − y⁴)`. Node `(i, j)` has index `i + m j`.
pub fn poisson2d(spec: &PoissonSpec) -> Result<(QuadraticProblem, CsrMatrix)> {
    let m = spec.m();
    let h = spec.h();
    let inv = 1.0 / (h * h);
    let mut t = Vec::with_capacity(5 * m * m);
    let mut b = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            let r = i + m * j;
            t.push((r, r, 4.0 * inv));
            if i > 0 {
                t.push((r, r - 1, -inv));
            }
            if i + 1 < m {
                t.push((r, r + 1, -inv));
            }
            if j > 0 {
                t.push((r, r - m, -inv));
            }
            if j + 1 < m {
                t.push((r, r + m, -inv));
            }
            b.push(-rhs((i + 1) as f64 * h, (j + 1) as f64 * h));
        }
    }
    let a = CsrMatrix::from_triplets(m * m, t)?;
    let q = QuadraticProblem::new(Box::new(a.clone()), b)?;
    Ok((q, a))
}
