//! Tucker model with orthonormal factors, fitted in the maximization form
//! `min −½‖(A⁽⁰⁾ᵀ, …, A⁽ᴺ⁻¹⁾ᵀ)·X‖²`.

use alloc::format;
use alloc::vec::Vec;

use super::Sweep;
use crate::error::{Error, Result};
use crate::linalg::leading_left_singular_vectors;
use crate::manifold::{GrassmannMap, GrassmannObjective};
use crate::tensor::{DenseTensor, Matrix};

/// Factors may drift this far from orthonormality before being rejected.
const ORTHO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerTensor {
    pub core: DenseTensor,
    pub factors: Vec<Matrix>,
}

impl TuckerTensor {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::dims("TuckerTensor::new", format!("{} factors for an order-{} core", factors.len(), core.order())));
        }
        for (n, a) in factors.iter().enumerate() {
            if a.cols() != core.shape()[n] {
                return Err(Error::dims("TuckerTensor::new", format!("factor {n} has {} columns, core extent {}", a.cols(), core.shape()[n])));
            }
        }
        check_orthonormal(&factors)?;
        Ok(Self { core, factors })
    }

    pub fn full(&self) -> DenseTensor {
        let mats: Vec<Option<&Matrix>> = self.factors.iter().map(Some).collect();
        self.core.multi_mode_product(&mats).expect("validated shapes")
    }
}

fn check_orthonormal(factors: &[Matrix]) -> Result<()> {
    for (mode, a) in factors.iter().enumerate() {
        let deviation = a.orthonormality_error();
        if !(deviation <= ORTHO_TOL) {
            return Err(Error::NotOrthonormal { mode, deviation });
        }
    }
    Ok(())
}

fn check_shapes(x: &DenseTensor, factors: &[Matrix]) -> Result<()> {
    if factors.len() != x.order() {
        return Err(Error::dims("tucker", format!("{} factors for an order-{} tensor", factors.len(), x.order())));
    }
    for (n, a) in factors.iter().enumerate() {
        if a.rows() != x.shape()[n] || a.cols() > a.rows() {
            return Err(Error::dims("tucker", format!("factor {n} is {}x{} for extent {}", a.rows(), a.cols(), x.shape()[n])));
        }
    }
    Ok(())
}

/// `X` multiplied by `A⁽ᵐ⁾ᵀ` in every mode except `skip`.
fn project_except(x: &DenseTensor, factors: &[Matrix], skip: Option<usize>) -> Result<DenseTensor> {
    let ts: Vec<Matrix> = factors.iter().map(|a| a.transpose()).collect();
    let mats: Vec<Option<&Matrix>> = ts.iter().enumerate().map(|(m, t)| (Some(m) != skip).then_some(t)).collect();
    x.multi_mode_product(&mats)
}

/// `(A⁽⁰⁾ᵀ, …, A⁽ᴺ⁻¹⁾ᵀ)·X`.
pub fn tucker_core(x: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    check_shapes(x, factors)?;
    project_except(x, factors, None)
}

/// `−½‖(A⁽⁰⁾ᵀ, …)·X‖²`; rejects non-orthonormal factors.
pub fn tucker_objective(x: &DenseTensor, factors: &[Matrix]) -> Result<f64> {
    check_orthonormal(factors)?;
    let s = tucker_core(x, factors)?;
    Ok(-0.5 * crate::vector::dot(s.data(), s.data()))
}

/// Blocks `−Y_(n) Y_(n)ᵀ A⁽ⁿ⁾` with `Y` the projection in all other modes.
pub fn tucker_euclidean_gradient(x: &DenseTensor, factors: &[Matrix]) -> Result<Vec<Matrix>> {
    check_shapes(x, factors)?;
    check_orthonormal(factors)?;
    (0..x.order())
        .map(|n| {
            let y = project_except(x, factors, Some(n))?.matricize(n)?;
            Ok(y.mul(&y.t_mul(&factors[n])).scaled(-1.0))
        })
        .collect()
}

/// Euclidean gradient projected blockwise onto the horizontal spaces.
pub fn tucker_riemannian_gradient(x: &DenseTensor, factors: &[Matrix]) -> Result<Vec<Matrix>> {
    let g = tucker_euclidean_gradient(x, factors)?;
    Ok(g.iter().zip(factors).map(|(gn, a)| crate::manifold::project_horizontal(a, gn)).collect())
}

/// One HOOI sweep: each visited factor becomes the `R_n` leading left
/// singular vectors of `Y_(n)`.
pub fn hooi_sweep(x: &DenseTensor, factors: &[Matrix], sweep: Sweep) -> Result<Vec<Matrix>> {
    check_shapes(x, factors)?;
    let mut cur = factors.to_vec();
    for n in sweep.modes(x.order()) {
        let y = project_except(x, &cur, Some(n))?.matricize(n)?;
        cur[n] = leading_left_singular_vectors(&y, cur[n].cols())?;
    }
    Ok(cur)
}

/// Truncated HOSVD: `A⁽ⁿ⁾` are the leading left singular vectors of `X_(n)`.
pub fn hosvd_truncate(x: &DenseTensor, ranks: &[usize]) -> Result<TuckerTensor> {
    if ranks.len() != x.order() {
        return Err(Error::dims("hosvd_truncate", format!("{} ranks for an order-{} tensor", ranks.len(), x.order())));
    }
    let mut factors = Vec::with_capacity(ranks.len());
    for (n, &r) in ranks.iter().enumerate() {
        if r == 0 || r > x.shape()[n] {
            return Err(Error::param("ranks", format!("rank {r} invalid for mode {n} of extent {}", x.shape()[n])));
        }
        factors.push(leading_left_singular_vectors(&x.matricize(n)?, r)?);
    }
    let core = tucker_core(x, &factors)?;
    TuckerTensor::new(core, factors)
}

/// Tucker fitting over a product of Grassmannians.
#[derive(Debug, Clone)]
pub struct TuckerProblem {
    x: DenseTensor,
    ranks: Vec<usize>,
}

impl TuckerProblem {
    pub fn new(x: DenseTensor, ranks: Vec<usize>) -> Result<Self> {
        if ranks.len() != x.order() || ranks.iter().zip(x.shape()).any(|(&r, &i)| r == 0 || r > i) {
            return Err(Error::param("ranks", format!("{ranks:?} incompatible with shape {:?}", x.shape())));
        }
        // The mode-n HOOI subproblem has rank at most the product of the
        // other ranks.
        let total: usize = ranks.iter().product();
        if ranks.iter().any(|&r| r * r > total) {
            return Err(Error::param("ranks", format!("{ranks:?}: each rank must not exceed the product of the others")));
        }
        Ok(Self { x, ranks })
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.x
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn hooi(&self, sweep: Sweep) -> Hooi<'_> {
        Hooi { problem: self, sweep }
    }

    pub fn hosvd(&self) -> Result<TuckerTensor> {
        hosvd_truncate(&self.x, &self.ranks)
    }
}

impl GrassmannObjective for TuckerProblem {
    fn shapes(&self) -> Vec<(usize, usize)> {
        self.x.shape().iter().zip(&self.ranks).map(|(&i, &r)| (i, r)).collect()
    }

    fn value(&self, factors: &[Matrix]) -> Result<f64> {
        tucker_objective(&self.x, factors)
    }

    fn gradient(&self, factors: &[Matrix]) -> Result<Vec<Matrix>> {
        tucker_riemannian_gradient(&self.x, factors)
    }
}

pub struct Hooi<'a> {
    problem: &'a TuckerProblem,
    sweep: Sweep,
}

impl GrassmannMap for Hooi<'_> {
    fn apply(&self, factors: &[Matrix]) -> Result<Vec<Matrix>> {
        hooi_sweep(&self.problem.x, factors, self.sweep)
    }
}
