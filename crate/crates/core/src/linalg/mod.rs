//! Small dense factorizations used throughout the crate.

mod cholesky;
mod eigen;
mod lu;
mod qr;
mod svd;
mod triangular;

pub use cholesky::cholesky;
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use lu::Lu;
pub use qr::{qr_thin, random_orthonormal_from};
pub use svd::{leading_left_singular_vectors, pinv, pinv_symmetric_psd, svd_thin, Svd};
pub use triangular::{solve_lower, solve_upper, solve_upper_transpose};

use crate::tensor::Matrix;

/// Flips each column so that its largest-magnitude entry is positive.
/// Returns the applied signs so paired factors can be flipped consistently.
pub(crate) fn fix_column_signs(m: &mut Matrix) -> alloc::vec::Vec<f64> {
    let mut signs = alloc::vec::Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let col = m.col_mut(j);
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = if *v < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
        signs.push(sign);
    }
    signs
}
