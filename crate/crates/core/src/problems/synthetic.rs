use alloc::vec::Vec;

use super::noise::add_two_stage_noise;
use super::rng::{normals, stream, Purpose};
use crate::decomp::KTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, random_orthonormal_from};
use crate::tensor::{DenseTensor, Matrix};

/// Random `n × p` matrix with orthonormal columns: Q of the sign-fixed QR of
/// a standard-normal matrix.
pub fn random_orthonormal(rng: &mut rand_chacha::ChaCha8Rng, n: usize, p: usize) -> Result<Matrix> {
    if p > n || p == 0 {
        return Err(Error::param("p", alloc::format!("need 0 < p ≤ n, got p = {p}, n = {n}")));
    }
    random_orthonormal_from(&Matrix::new(n, p, normals(rng, n * p))?)
}

/// `U Lᵀ` with `U` random orthonormal and `L` the Cholesky factor of the
/// matrix with unit diagonal and `c` elsewhere, so every pair of columns
/// has normalized inner product `c`.
pub fn collinear_factors(rng: &mut rand_chacha::ChaCha8Rng, i: usize, r: usize, c: f64) -> Result<Matrix> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::param("collinearity", alloc::format!("{c} outside [0, 1)")));
    }
    let gram = Matrix::from_fn(r, r, |a, b| if a == b { 1.0 } else { c });
    let l = cholesky(&gram)?;
    Ok(random_orthonormal(rng, i, r)?.mul_t(&l))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpTestSpec {
    pub extent: usize,
    pub order: usize,
    pub rank: usize,
    pub collinearity: f64,
    pub l1: f64,
    pub l2: f64,
    pub seed: u64,
}

impl CpTestSpec {
    pub fn cube(extent: usize, rank: usize, collinearity: f64, l1: f64, l2: f64, seed: u64) -> Self {
        Self { extent, order: 3, rank, collinearity, l1, l2, seed }
    }
}

/// Truth factors and the noisy tensor for trial `trial`.
pub fn generate_collinear_cp(spec: &CpTestSpec, trial: u64) -> Result<(KTensor, DenseTensor)> {
    if spec.rank > spec.extent || spec.rank == 0 {
        return Err(Error::param("rank", "must be positive and not exceed the extent"));
    }
    check_levels(spec.l1, spec.l2)?;
    let mut rng = stream(spec.seed, trial, Purpose::Factors);
    let factors: Vec<Matrix> =
        (0..spec.order).map(|_| collinear_factors(&mut rng, spec.extent, spec.rank, spec.collinearity)).collect::<Result<_>>()?;
    let truth = KTensor::new(factors)?;
    let x = truth.full();
    let noisy = noisy_copy(&x, spec.seed, trial, spec.l1, spec.l2)?;
    Ok((truth, noisy))
}

/// Generator-level bound on the noise levels: below the level at which noise
/// matches the signal.
fn check_levels(l1: f64, l2: f64) -> Result<()> {
    for l in [l1, l2] {
        if !(0.0..50.0).contains(&l) {
            return Err(Error::param("noise level", alloc::format!("{l} outside [0, 50)")));
        }
    }
    Ok(())
}

fn noisy_copy(x: &DenseTensor, seed: u64, trial: u64, l1: f64, l2: f64) -> Result<DenseTensor> {
    let shape = x.shape().to_vec();
    let n1 = DenseTensor::new(shape.clone(), normals(&mut stream(seed, trial, Purpose::Noise1), x.len()))?;
    let n2 = DenseTensor::new(shape, normals(&mut stream(seed, trial, Purpose::Noise2), x.len()))?;
    add_two_stage_noise(x, &n1, l1, &n2, l2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerTestSpec {
    pub extents: Vec<usize>,
    pub ranks: Vec<usize>,
    pub l1: f64,
    pub l2: f64,
    pub seed: u64,
}

/// Standard-normal core times random orthonormal factors, then two-stage
/// noise. The noiseless tensor depends only on the seed; `trial` selects the
/// noise draws.
pub fn generate_synthetic_tucker(spec: &TuckerTestSpec, trial: u64) -> Result<DenseTensor> {
    if spec.extents.len() != spec.ranks.len() || spec.ranks.iter().zip(&spec.extents).any(|(&r, &i)| r == 0 || r > i) {
        return Err(Error::param("ranks", alloc::format!("{:?} incompatible with extents {:?}", spec.ranks, spec.extents)));
    }
    check_levels(spec.l1, spec.l2)?;
    let mut rng = stream(spec.seed, 0, Purpose::Factors);
    let factors: Vec<Matrix> =
        spec.extents.iter().zip(&spec.ranks).map(|(&i, &r)| random_orthonormal(&mut rng, i, r)).collect::<Result<_>>()?;
    let count = spec.ranks.iter().product();
    let core = DenseTensor::new(spec.ranks.clone(), normals(&mut stream(spec.seed, 0, Purpose::Core), count))?;
    let mats: Vec<Option<&Matrix>> = factors.iter().map(Some).collect();
    let x = core.multi_mode_product(&mats)?;
    noisy_copy(&x, spec.seed, trial, spec.l1, spec.l2)
}

/// Standard-normal factor entries, flattened mode by mode.
pub fn random_cp_start(shape: &[usize], rank: usize, seed: u64, trial: u64) -> Vec<f64> {
    normals(&mut stream(seed, trial, Purpose::Start), shape.iter().sum::<usize>() * rank)
}
