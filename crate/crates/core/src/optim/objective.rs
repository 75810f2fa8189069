use alloc::vec::Vec;

use crate::error::Result;

/// Smooth objective on flat vectors.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// Exact minimizing step along `p` from `x` with gradient `g`, when the
    /// objective is quadratic.
    fn exact_step(&self, _x: &[f64], _g: &[f64], _p: &[f64]) -> Option<Result<f64>> {
        None
    }
}
