use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

fn check_level(l: f64) -> Result<f64> {
    if !(0.0..100.0).contains(&l) {
        return Err(Error::param("noise level", alloc::format!("{l} outside [0, 100)")));
    }
    Ok(libm::sqrt(l / (100.0 - l)))
}

/// `X + √(ℓ/(100−ℓ)) (‖X‖/‖N‖) N`.
pub fn add_homoskedastic(x: &DenseTensor, n: &DenseTensor, level: f64) -> Result<DenseTensor> {
    let c = check_level(level)?;
    if c == 0.0 {
        return Ok(x.clone());
    }
    x.add_scaled(c * x.frob_norm() / n.frob_norm(), n)
}

/// `X + √(ℓ/(100−ℓ)) (‖X‖/‖N∗X‖) N∗X`.
pub fn add_heteroskedastic(x: &DenseTensor, n: &DenseTensor, level: f64) -> Result<DenseTensor> {
    let c = check_level(level)?;
    if c == 0.0 {
        return Ok(x.clone());
    }
    let nx = n.hadamard(x)?;
    x.add_scaled(c * x.frob_norm() / nx.frob_norm(), &nx)
}

/// Homoskedastic noise at level `ℓ₁` followed by heteroskedastic noise at
/// level `ℓ₂`.
pub fn add_two_stage_noise(x: &DenseTensor, n1: &DenseTensor, l1: f64, n2: &DenseTensor, l2: f64) -> Result<DenseTensor> {
    add_heteroskedastic(&add_homoskedastic(x, n1, l1)?, n2, l2)
}

/// `X + c (‖X‖/‖N‖) N`, used with `N` uniform on `[0, 1]` and `c = 2.5`.
pub fn add_uniform_noise(x: &DenseTensor, n: &DenseTensor, c: f64) -> Result<DenseTensor> {
    x.add_scaled(c * x.frob_norm() / n.frob_norm(), n)
}
