//! Grassmann geometry on Stiefel representatives and accelerators on
//! products of Grassmannians.

mod driver;
mod geometry;

pub use driver::{manifold_fixed_point_solve, manifold_npncg_solve, manifold_npqn_solve, ManifoldNcgOptions, ManifoldOptions, ManifoldPrecond, TransportMode};
pub use geometry::{grassmann_exp, grassmann_log, project_horizontal, transport, transport_self, Geodesic};

use alloc::vec::Vec;

use crate::error::Result;
use crate::tensor::Matrix;

/// Smooth objective on a product of Grassmannians, given on orthonormal
/// representatives. `gradient` returns horizontal (Riemannian) blocks.
pub trait GrassmannObjective {
    /// `(n_k, p_k)` per component.
    fn shapes(&self) -> Vec<(usize, usize)>;
    fn value(&self, x: &[Matrix]) -> Result<f64>;
    fn gradient(&self, x: &[Matrix]) -> Result<Vec<Matrix>>;

    fn value_and_gradient(&self, x: &[Matrix]) -> Result<(f64, Vec<Matrix>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }
}

/// Fixed-point sweep on orthonormal representatives (e.g. HOOI).
pub trait GrassmannMap {
    fn apply(&self, x: &[Matrix]) -> Result<Vec<Matrix>>;
}

/// `Σ_k ⟨X_k, Y_k⟩`.
pub fn product_inner(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

/// Concatenates the components, each column-major, in mode order.
pub fn vectorize(t: &[Matrix]) -> Vec<f64> {
    crate::decomp::flatten(t)
}

pub fn devectorize(shapes: &[(usize, usize)], v: &[f64]) -> Result<Vec<Matrix>> {
    crate::decomp::unflatten(shapes, v)
}
