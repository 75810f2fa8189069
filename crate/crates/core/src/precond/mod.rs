//! Nonlinear preconditioning: a fixed-point map `Q` induces the
//! preconditioned gradient `ḡ = x − Q(x)`, which the outer accelerators use
//! in place of (LP) or alongside (TP) the gradient.

mod driver;
pub mod fixed_point;
pub mod npncg;
pub mod npqn;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::optim::{LinearOperator, Objective, QuadraticProblem};
use crate::vector;

pub use fixed_point::fixed_point_solve;
pub use npncg::{npncg_solve, NcgOptions};
pub use driver::LineSearch;
pub use npqn::{npqn_solve, CurvatureGuard, EtaPolicy, NpqnOptions, QnConfig, QnDirection, QnFamily, Variant};

/// One sweep of a fixed-point iteration `x ↦ Q(x)`.
pub trait FixedPointMap {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// `ḡ = x − Q(x)`.
pub fn preconditioned_gradient(q: &dyn FixedPointMap, x: &[f64]) -> Result<Vec<f64>> {
    let qx = q.apply(x)?;
    if qx.len() != x.len() {
        return Err(Error::dims("preconditioned_gradient", alloc::format!("Q returned {} entries for {}", qx.len(), x.len())));
    }
    Ok(vector::sub(x, &qx))
}

/// How the outer method obtains `ḡ`.
#[derive(Clone, Copy)]
pub enum Preconditioner<'a> {
    /// `ḡ = g`; no fixed-point sweeps are performed.
    Identity,
    FixedPoint(&'a dyn FixedPointMap),
}

impl Preconditioner<'_> {
    pub fn is_identity(&self) -> bool {
        matches!(self, Preconditioner::Identity)
    }

    /// Returns `ḡ` and the number of sweeps spent.
    pub fn gbar(&self, x: &[f64], g: &[f64]) -> Result<(Vec<f64>, usize)> {
        match self {
            Preconditioner::Identity => Ok((g.to_vec(), 0)),
            Preconditioner::FixedPoint(q) => Ok((preconditioned_gradient(*q, x)?, 1)),
        }
    }
}

/// Richardson map `Q(x) = x − P(Ax − b)`.
pub struct LinearFixedPoint<'a> {
    q: &'a QuadraticProblem,
    p: &'a dyn LinearOperator,
}

impl<'a> LinearFixedPoint<'a> {
    pub fn new(q: &'a QuadraticProblem, p: &'a dyn LinearOperator) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::dims("LinearFixedPoint", alloc::format!("P is {}, A is {}", p.dim(), q.dim())));
        }
        Ok(Self { q, p })
    }
}

impl FixedPointMap for LinearFixedPoint<'_> {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(crate::optim::linear::richardson_step(self.q, x, self.p))
    }
}

/// Gradient step `Q(x) = x − g(x)`.
pub struct GradientStep<'a, O: Objective + ?Sized>(pub &'a O);

impl<O: Objective + ?Sized> FixedPointMap for GradientStep<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vector::sub(x, &self.0.gradient(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::linear::Ssor;
    use crate::optim::CsrMatrix;
    use crate::tensor::Matrix;
    use alloc::boxed::Box;
    use alloc::vec;

    #[test]
    fn linear_map_gives_preconditioned_residual() {
        let a = Matrix::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]]).unwrap();
        let csr = CsrMatrix::from_dense(&a).unwrap();
        let p = Ssor::sgs(&csr).unwrap();
        let q = QuadraticProblem::new(Box::new(a), vec![1.0, 2.0]).unwrap();
        let map = LinearFixedPoint::new(&q, &p).unwrap();
        let x = [0.3, -0.7];
        let gbar = preconditioned_gradient(&map, &x).unwrap();
        let want = p.apply(&q.residual_gradient(&x));
        assert!(vector::rel_diff(&gbar, &want) < 1e-15);
        let xs = Lu::new(&Matrix::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]]).unwrap()).unwrap().solve(&[1.0, 2.0]);
        assert!(vector::norm(&preconditioned_gradient(&map, &xs).unwrap()) < 1e-15);
    }

    use crate::linalg::Lu;
}
