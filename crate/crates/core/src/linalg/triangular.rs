use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

fn check_pivot(v: f64, scale: f64, context: &'static str) -> Result<()> {
    if v == 0.0 || !v.is_finite() || v.abs() <= 1e-300 * scale.max(1.0) {
        return Err(Error::Singular { context });
    }
    Ok(())
}

/// Solves `R x = b` for upper-triangular `R` (only the upper triangle is read).
pub fn solve_upper(r: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = r.rows();
    debug_assert!(r.is_square() && b.len() == n);
    let scale = r.max_abs();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= r.get(i, j) * x[j];
        }
        check_pivot(r.get(i, i), scale, "upper triangular solve")?;
        x[i] = acc / r.get(i, i);
    }
    Ok(x)
}

/// Solves `Rᵀ x = b` for upper-triangular `R`.
pub fn solve_upper_transpose(r: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = r.rows();
    debug_assert!(r.is_square() && b.len() == n);
    let scale = r.max_abs();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut acc = x[i];
        for j in 0..i {
            acc -= r.get(j, i) * x[j];
        }
        check_pivot(r.get(i, i), scale, "transposed upper triangular solve")?;
        x[i] = acc / r.get(i, i);
    }
    Ok(x)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    debug_assert!(l.is_square() && b.len() == n);
    let scale = l.max_abs();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut acc = x[i];
        for j in 0..i {
            acc -= l.get(i, j) * x[j];
        }
        check_pivot(l.get(i, i), scale, "lower triangular solve")?;
        x[i] = acc / l.get(i, i);
    }
    Ok(x)
}
