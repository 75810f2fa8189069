use alloc::vec::Vec;

use super::{fix_column_signs, qr_thin, symmetric_eigen};
use crate::error::{Error, Result};
use crate::tensor::Matrix;
use crate::vector;

/// Thin SVD `A = U diag(s) Vᵀ` with `k = min(rows, cols)` singular triplets
/// in descending order. Columns of `U` for zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi SVD.
pub fn svd_thin(a: &Matrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd_thin(&a.transpose())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let (m, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = Matrix::identity(n);
    let tol = f64::EPSILON * m as f64;
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = vector::dot(u.col(p), u.col(p));
                let beta = vector::dot(u.col(q), u.col(q));
                let gamma = vector::dot(u.col(p), u.col(q));
                if gamma == 0.0 || gamma.abs() <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonFinite { context: "jacobi svd did not converge" });
    }
    let mut s: Vec<f64> = (0..n).map(|j| vector::norm(u.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(core::cmp::Ordering::Equal));
    let smax = order.first().map_or(0.0, |&k| s[k]);
    let cutoff = smax * f64::EPSILON * m.max(n) as f64;
    let mut uo = Matrix::zeros(m, n);
    let mut vo = Matrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        vo.col_mut(j).copy_from_slice(v.col(k));
        if s[k] > cutoff && s[k] > 0.0 {
            let inv = 1.0 / s[k];
            for (dst, src) in uo.col_mut(j).iter_mut().zip(u.col(k)) {
                *dst = src * inv;
            }
        }
    }
    s = order.iter().map(|&k| s[k]).collect();
    // Sign convention on U; zero columns fall back to V's signs.
    for j in 0..n {
        let col = if vector::norm_inf(uo.col(j)) > 0.0 { uo.col(j) } else { vo.col(j) };
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for x in col {
            if x.abs() > best {
                best = x.abs();
                sign = if *x < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            vector::scale(-1.0, uo.col_mut(j));
            vector::scale(-1.0, vo.col_mut(j));
        }
    }
    Ok(Svd { u: uo, s, v: vo })
}

#[inline]
fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    let data = m.data_mut();
    for i in 0..rows {
        let a = data[i + rows * p];
        let b = data[i + rows * q];
        data[i + rows * p] = c * a - s * b;
        data[i + rows * q] = s * a + c * b;
    }
}

/// Moore-Penrose pseudoinverse with cutoff `max(rows, cols) * eps * s_max`.
pub fn pinv(a: &Matrix) -> Result<Matrix> {
    let svd = svd_thin(a)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = a.rows().max(a.cols()) as f64 * f64::EPSILON * smax;
    let mut out = Matrix::zeros(a.cols(), a.rows());
    for (k, &sk) in svd.s.iter().enumerate() {
        if sk > cutoff {
            let vk = svd.v.col(k);
            let uk = svd.u.col(k);
            for j in 0..a.rows() {
                let f = uk[j] / sk;
                if f != 0.0 {
                    vector::axpy(f, vk, out.col_mut(j));
                }
            }
        }
    }
    Ok(out)
}

/// Pseudoinverse of a symmetric positive semidefinite matrix through its
/// eigen-decomposition, cutoff `n * eps * lambda_max`.
pub fn pinv_symmetric_psd(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let eig = symmetric_eigen(a)?;
    let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = n as f64 * f64::EPSILON * lmax;
    let mut out = Matrix::zeros(n, n);
    for (k, &lk) in eig.values.iter().enumerate() {
        if lk > cutoff {
            let vk = eig.vectors.col(k);
            for j in 0..n {
                let f = vk[j] / lk;
                if f != 0.0 {
                    vector::axpy(f, vk, out.col_mut(j));
                }
            }
        }
    }
    Ok(out)
}

/// The `k` leading left singular vectors of `y`, computed from whichever
/// Gram matrix is smaller.
pub fn leading_left_singular_vectors(y: &Matrix, k: usize) -> Result<Matrix> {
    let (m, c) = (y.rows(), y.cols());
    if k > m.min(c) {
        return Err(Error::param("rank", alloc::format!("{k} exceeds the dimensions of a {m}x{c} matrix")));
    }
    if m <= c {
        let g = y.mul_t(y);
        let eig = symmetric_eigen(&g)?;
        return Ok(eig.vectors.columns(0, k));
    }
    let eig = symmetric_eigen(&y.gram())?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let usable = eig.values.iter().take(k).all(|&l| l > lmax * 1e-20 && l > 0.0);
    if !usable {
        let svd = svd_thin(y)?;
        if svd.s.iter().take(k).any(|&s| s == 0.0) {
            return Err(Error::Singular { context: "leading singular vectors of a rank-deficient matrix" });
        }
        return Ok(svd.u.columns(0, k));
    }
    let mut u = Matrix::zeros(m, k);
    for j in 0..k {
        let col = y.mul_vec(eig.vectors.col(j));
        let inv = 1.0 / libm::sqrt(eig.values[j]);
        for (dst, src) in u.col_mut(j).iter_mut().zip(&col) {
            *dst = src * inv;
        }
    }
    let (mut q, _) = qr_thin(&u)?;
    fix_column_signs(&mut q);
    Ok(q)
}
