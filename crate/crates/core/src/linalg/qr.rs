use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Matrix;
use crate::vector;

/// Householder thin QR of an `m x n` matrix with `m >= n`.
///
/// The diagonal of `R` is made nonnegative, which makes the factorization
/// unique for full column rank input.
pub fn qr_thin(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::dims("qr_thin", alloc::format!("{m}x{n} has more columns than rows")));
    }
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x = &w.col(k)[k..];
        let nx = vector::norm(x);
        let mut v = x.to_vec();
        if nx == 0.0 {
            reflectors.push(vec![0.0; m - k]);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -nx } else { nx };
        v[0] -= alpha;
        let nv = vector::norm(&v);
        vector::scale(1.0 / nv, &mut v);
        for j in k..n {
            let c = &mut w.col_mut(j)[k..];
            let t = 2.0 * vector::dot(&v, c);
            vector::axpy(-t, &v, c);
        }
        reflectors.push(v);
    }
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            r.set(i, j, w.get(i, j));
        }
    }
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q.set(j, j, 1.0);
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        for j in 0..n {
            let c = &mut q.col_mut(j)[k..];
            let t = 2.0 * vector::dot(v, c);
            if t != 0.0 {
                vector::axpy(-t, v, c);
            }
        }
    }
    for k in 0..n {
        if r.get(k, k) < 0.0 {
            for j in k..n {
                r.set(k, j, -r.get(k, j));
            }
            vector::scale(-1.0, q.col_mut(k));
        }
    }
    Ok((q, r))
}

/// Orthonormal factor of the sign-fixed QR of `g` (typically Gaussian).
pub fn random_orthonormal_from(g: &Matrix) -> Result<Matrix> {
    Ok(qr_thin(g)?.0)
}
