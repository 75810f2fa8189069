//! CP and Tucker models: objectives, gradients and the alternating sweeps
//! that serve as nonlinear preconditioners.

pub mod cp;
pub mod tucker;

pub use cp::{cp_als_sweep, cp_full, cp_gradient, cp_objective, mttkrp, CpAls, CpProblem, KTensor};
pub use tucker::{
    hooi_sweep, hosvd_truncate, tucker_core, tucker_euclidean_gradient, tucker_objective, tucker_riemannian_gradient, Hooi,
    TuckerProblem, TuckerTensor,
};

/// Mode visiting order of one alternating sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Modes `0, 1, ..., N−1`.
    Forward,
    /// Modes `0, ..., N−1, N−2, ..., 0`.
    ForwardBackward,
}

impl Sweep {
    pub fn modes(&self, order: usize) -> alloc::vec::Vec<usize> {
        let mut v: alloc::vec::Vec<usize> = (0..order).collect();
        if *self == Sweep::ForwardBackward {
            v.extend((0..order.saturating_sub(1)).rev());
        }
        v
    }
}

/// Total length of the flattened factors `(I_n × R_n)`.
pub(crate) fn flat_len(shapes: &[(usize, usize)]) -> usize {
    shapes.iter().map(|(r, c)| r * c).sum()
}

pub(crate) fn flatten(factors: &[crate::Matrix]) -> alloc::vec::Vec<f64> {
    let mut v = alloc::vec::Vec::with_capacity(factors.iter().map(|a| a.data().len()).sum());
    for a in factors {
        v.extend_from_slice(a.data());
    }
    v
}

pub(crate) fn unflatten(shapes: &[(usize, usize)], x: &[f64]) -> crate::Result<alloc::vec::Vec<crate::Matrix>> {
    if x.len() != flat_len(shapes) {
        return Err(crate::Error::dims("unflatten", alloc::format!("{} entries for {} unknowns", x.len(), flat_len(shapes))));
    }
    let mut off = 0;
    let mut out = alloc::vec::Vec::with_capacity(shapes.len());
    for &(r, c) in shapes {
        out.push(crate::Matrix::new(r, c, x[off..off + r * c].to_vec())?);
        off += r * c;
    }
    Ok(out)
}
