//! Dense tensor algebra.

mod dense;
mod matrix;
mod products;

pub use dense::DenseTensor;
pub use matrix::Matrix;
pub use products::{hadamard, khatri_rao, khatri_rao_list, kronecker, kronecker_list};
