//! Limited-memory good-Broyden inverse applies.

use alloc::vec::Vec;

use super::{PairKind, QnMemory};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::tensor::Matrix;
use crate::vector;

/// Pair admission test: rejects `|sᵀy| ≤ 1e-14 ‖s‖‖y‖`.
pub fn admits_pair(s: &[f64], y: &[f64]) -> bool {
    let sy = vector::dot(s, y).abs();
    sy > 1e-14 * vector::norm(s) * vector::norm(y) && sy.is_finite()
}

/// Compact-form `A⁻¹v = ηv − (ηY − S)(M + ηSᵀY)⁻¹ ηSᵀv`.
pub fn compact_apply(eta: f64, mem: &QnMemory, kind: PairKind, v: &[f64]) -> Result<Vec<f64>> {
    let m = mem.len();
    let mut out = vector::scaled(eta, v);
    if m == 0 {
        return Ok(out);
    }
    let k = Matrix::from_fn(m, m, |i, j| {
        let mij = if i > j { -mem.s_dot_s(i, j) } else { 0.0 };
        mij + eta * mem.s_dot_diff(kind, i, j)
    });
    let rhs: Vec<f64> = (0..m).map(|i| eta * vector::dot(mem.s(i), v)).collect();
    let w = Lu::new(&k)?.solve(&rhs);
    for i in 0..m {
        vector::axpy(-eta * w[i], mem.diff(kind, i), &mut out);
        vector::axpy(w[i], mem.s(i), &mut out);
    }
    if !vector::all_finite(&out) {
        return Err(Error::Singular { context: "compact Broyden apply" });
    }
    Ok(out)
}

/// Transformed-preconditioning operator
/// `Â⁻¹(g) = η(ḡ − (ηȲ − S)(M̄ + ηSᵀY)⁻¹ Sᵀg)` with `M̄ᵢⱼ = gᵢᵀsⱼ` (i > j).
pub fn tp_apply(eta: f64, mem: &QnMemory, g: &[f64], gbar: &[f64]) -> Result<Vec<f64>> {
    let m = mem.len();
    let mut out = gbar.to_vec();
    if m > 0 {
        let k = Matrix::from_fn(m, m, |i, j| {
            let mij = if i > j { mem.g_dot_s(i, j) } else { 0.0 };
            mij + eta * mem.s_dot_diff(PairKind::Gradient, i, j)
        });
        let rhs: Vec<f64> = (0..m).map(|i| vector::dot(mem.s(i), g)).collect();
        let w = Lu::new(&k)?.solve(&rhs);
        for i in 0..m {
            vector::axpy(-eta * w[i], mem.ybar(i), &mut out);
            vector::axpy(w[i], mem.s(i), &mut out);
        }
    }
    vector::scale(eta, &mut out);
    if !vector::all_finite(&out) {
        return Err(Error::Singular { context: "transformed-preconditioning Broyden apply" });
    }
    Ok(out)
}
