//! CP model `⟦A⁽⁰⁾, …, A⁽ᴺ⁻¹⁾⟧` fitted by `½‖X − full‖²`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{flatten, unflatten, Sweep};
use crate::error::{Error, Result};
use crate::linalg::pinv_symmetric_psd;
use crate::optim::Objective;
use crate::precond::FixedPointMap;
use crate::tensor::{khatri_rao_list, DenseTensor, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct KTensor {
    factors: Vec<Matrix>,
}

impl KTensor {
    pub fn new(factors: Vec<Matrix>) -> Result<Self> {
        let r = factors.first().ok_or_else(|| Error::param("factors", "need at least one factor"))?.cols();
        if factors.iter().any(|a| a.cols() != r || a.rows() == 0) {
            return Err(Error::dims("KTensor::new", format!("factor column counts must all equal {r}")));
        }
        Ok(Self { factors })
    }

    pub fn from_flat(shape: &[usize], rank: usize, x: &[f64]) -> Result<Self> {
        let shapes: Vec<(usize, usize)> = shape.iter().map(|&i| (i, rank)).collect();
        Self::new(unflatten(&shapes, x)?)
    }

    pub fn rank(&self) -> usize {
        self.factors[0].cols()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|a| a.rows()).collect()
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn factor(&self, n: usize) -> &Matrix {
        &self.factors[n]
    }

    pub fn into_factors(self) -> Vec<Matrix> {
        self.factors
    }

    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.factors)
    }

    pub fn full(&self) -> DenseTensor {
        cp_full(self)
    }

    /// `∗_{m≠n} A⁽ᵐ⁾ᵀA⁽ᵐ⁾`.
    pub fn gamma(&self, n: usize) -> Matrix {
        let r = self.rank();
        let mut g = Matrix::from_fn(r, r, |_, _| 1.0);
        for (m, a) in self.factors.iter().enumerate() {
            if m != n {
                let ata = a.gram();
                for (x, y) in g.data_mut().iter_mut().zip(ata.data()) {
                    *x *= y;
                }
            }
        }
        g
    }
}

/// Khatri-Rao product of the factors with index in `modes`, ordered so the
/// lowest mode varies fastest.
fn kr_fastest_first(kt: &KTensor, modes: core::ops::Range<usize>) -> Matrix {
    if modes.is_empty() {
        return Matrix::from_fn(1, kt.rank(), |_, _| 1.0);
    }
    let mats: Vec<&Matrix> = modes.rev().map(|m| kt.factor(m)).collect();
    khatri_rao_list(&mats).expect("factors share the rank")
}

/// Entries `Σ_r ∏_n A⁽ⁿ⁾(i_n, r)`.
pub fn cp_full(kt: &KTensor) -> DenseTensor {
    let shape = kt.shape();
    let a0 = kt.factor(0);
    let rest = kr_fastest_first(kt, 1..kt.order());
    let (i0, r) = (a0.rows(), kt.rank());
    let mut data = vec![0.0; i0 * rest.rows()];
    for c in 0..r {
        let a = a0.col(c);
        for (j, &k) in rest.col(c).iter().enumerate() {
            if k != 0.0 {
                crate::vector::axpy(k, a, &mut data[i0 * j..i0 * (j + 1)]);
            }
        }
    }
    DenseTensor::new(shape, data).expect("shape matches factors")
}

/// `X_(n) (A⁽ᴺ⁻¹⁾ ⊙ … ⊙ A⁽ⁿ⁺¹⁾ ⊙ A⁽ⁿ⁻¹⁾ ⊙ … ⊙ A⁽⁰⁾)`, without forming the
/// unfolding.
pub fn mttkrp(x: &DenseTensor, kt: &KTensor, n: usize) -> Result<Matrix> {
    if x.shape() != kt.shape().as_slice() {
        return Err(Error::dims("mttkrp", format!("tensor {:?} vs model {:?}", x.shape(), kt.shape())));
    }
    let order = kt.order();
    let left_kr = kr_fastest_first(kt, 0..n);
    let right_kr = kr_fastest_first(kt, n + 1..order);
    let (left, mid, right) = (left_kr.rows(), x.shape()[n], right_kr.rows());
    let r = kt.rank();
    let mut out = Matrix::zeros(mid, r);
    let data = x.data();
    if left == 1 {
        // Mode 0: columns of the unfolding are contiguous.
        for rr in 0..right {
            let col = &data[mid * rr..mid * (rr + 1)];
            for c in 0..r {
                crate::vector::axpy(right_kr.get(rr, c), col, out.col_mut(c));
            }
        }
        return Ok(out);
    }
    // Contract the leading modes slab by slab: acc(i, c) = Σ_l X(l, i, rr) L(l, c).
    let mut acc = vec![0.0; mid * r];
    for rr in 0..right {
        let slab = &data[left * mid * rr..left * mid * (rr + 1)];
        for (i, fiber) in slab.chunks_exact(left).enumerate() {
            for c in 0..r {
                acc[i + mid * c] = crate::vector::dot(fiber, left_kr.col(c));
            }
        }
        for c in 0..r {
            crate::vector::axpy(right_kr.get(rr, c), &acc[mid * c..mid * (c + 1)], out.col_mut(c));
        }
    }
    Ok(out)
}

/// `½‖X − full(kt)‖²`.
pub fn cp_objective(x: &DenseTensor, kt: &KTensor) -> Result<f64> {
    if x.shape() != kt.shape().as_slice() {
        return Err(Error::dims("cp_objective", format!("tensor {:?} vs model {:?}", x.shape(), kt.shape())));
    }
    let full = cp_full(kt);
    Ok(0.5 * x.data().iter().zip(full.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Blocks `∂f/∂A⁽ⁿ⁾ = −mttkrp_n + A⁽ⁿ⁾Γ⁽ⁿ⁾`.
pub fn cp_gradient(x: &DenseTensor, kt: &KTensor) -> Result<Vec<Matrix>> {
    (0..kt.order()).map(|n| Ok(kt.factor(n).mul(&kt.gamma(n)).sub(&mttkrp(x, kt, n)?))).collect()
}

/// One ALS sweep: each visited factor is replaced by the exact least-squares
/// solution `mttkrp_n (Γ⁽ⁿ⁾)†` using the latest values of the others.
pub fn cp_als_sweep(x: &DenseTensor, kt: &KTensor, sweep: Sweep) -> Result<KTensor> {
    let mut cur = kt.clone();
    for n in sweep.modes(kt.order()) {
        let m = mttkrp(x, &cur, n)?;
        let gp = pinv_symmetric_psd(&cur.gamma(n))?;
        cur.factors[n] = m.mul(&gp);
    }
    Ok(cur)
}

/// CP fitting on flat factor vectors.
#[derive(Debug, Clone)]
pub struct CpProblem {
    x: DenseTensor,
    rank: usize,
}

impl CpProblem {
    pub fn new(x: DenseTensor, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::param("rank", "must be positive"));
        }
        Ok(Self { x, rank })
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.x
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ktensor(&self, v: &[f64]) -> Result<KTensor> {
        KTensor::from_flat(self.x.shape(), self.rank, v)
    }

    /// The ALS sweep as a fixed-point map on flat vectors.
    pub fn als(&self, sweep: Sweep) -> CpAls<'_> {
        CpAls { problem: self, sweep }
    }
}

impl Objective for CpProblem {
    fn dim(&self) -> usize {
        self.x.shape().iter().sum::<usize>() * self.rank
    }

    fn value(&self, v: &[f64]) -> Result<f64> {
        cp_objective(&self.x, &self.ktensor(v)?)
    }

    fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(flatten(&cp_gradient(&self.x, &self.ktensor(v)?)?))
    }
}

pub struct CpAls<'a> {
    problem: &'a CpProblem,
    sweep: Sweep,
}

impl FixedPointMap for CpAls<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(cp_als_sweep(&self.problem.x, &self.problem.ktensor(v)?, self.sweep)?.to_flat())
    }
}
