//! Experiment generators: the 2D Poisson quadratic, synthetic CP and Tucker
//! tensors with two-stage noise, and byte-level tensor formats.

pub mod io;
mod noise;
mod poisson;
pub mod rng;
mod synthetic;

pub use noise::{add_heteroskedastic, add_homoskedastic, add_two_stage_noise, add_uniform_noise};
pub use poisson::{poisson2d, PoissonSpec};
pub use synthetic::{
    collinear_factors, generate_collinear_cp, generate_synthetic_tucker, random_cp_start, random_orthonormal, CpTestSpec,
    TuckerTestSpec,
};
