use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Lower-triangular `L` with `L Lᵀ = A` for symmetric positive definite `A`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dims("cholesky", alloc::format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { context: "cholesky" });
        }
        let ljj = libm::sqrt(d);
        l.set(j, j, ljj);
        for i in j + 1..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, v / ljj);
        }
    }
    Ok(l)
}
