use alloc::format;
use alloc::vec::Vec;

use super::Matrix;
use crate::error::{Error, Result};

/// Column-wise Kronecker product: column k is `kron(c_k, d_k)`, so the row
/// index of `d` varies fastest.
pub fn khatri_rao(c: &Matrix, d: &Matrix) -> Result<Matrix> {
    if c.cols() != d.cols() {
        return Err(Error::dims("khatri_rao", format!("{} vs {} columns", c.cols(), d.cols())));
    }
    let (i, j) = (c.rows(), d.rows());
    let mut out = Matrix::zeros(i * j, c.cols());
    for k in 0..c.cols() {
        let (ck, dk) = (c.col(k), d.col(k));
        let ok = out.col_mut(k);
        for (a, ca) in ck.iter().enumerate() {
            for (b, db) in dk.iter().enumerate() {
                ok[a * j + b] = ca * db;
            }
        }
    }
    Ok(out)
}

/// `mats[0] ⊙ mats[1] ⊙ ...`; the last matrix varies fastest.
pub fn khatri_rao_list(mats: &[&Matrix]) -> Result<Matrix> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::dims("khatri_rao_list", "empty list".into()))?;
    let mut acc = (*first).clone();
    for m in rest {
        acc = khatri_rao(&acc, m)?;
    }
    Ok(acc)
}

pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (k, l) = (b.rows(), b.cols());
    Matrix::from_fn(a.rows() * k, a.cols() * l, |r, c| a.get(r / k, c / l) * b.get(r % k, c % l))
}

/// `mats[0] ⊗ mats[1] ⊗ ...`; the last matrix varies fastest.
pub fn kronecker_list(mats: &[&Matrix]) -> Result<Matrix> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::dims("kronecker_list", "empty list".into()))?;
    Ok(rest.iter().fold((*first).clone(), |acc, m| kronecker(&acc, m)))
}

pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::dims(
            "hadamard",
            format!("{}x{} vs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        ));
    }
    let data: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Matrix::new(a.rows(), a.cols(), data)
}
