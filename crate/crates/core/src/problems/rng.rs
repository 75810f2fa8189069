//! Seeded random streams. Every draw comes from a ChaCha8 generator keyed
//! by the campaign seed, with the stream id derived from the trial index and
//! the purpose, so trials are reproducible independently of one another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use alloc::vec::Vec;

/// What a stream is used for; each purpose gets its own stream per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Factors = 1,
    Core = 2,
    Noise1 = 3,
    Noise2 = 4,
    Start = 5,
    Probe = 6,
}

pub fn stream(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 8) | purpose as u64);
    rng
}

/// Standard normals (ziggurat). With the `std` feature the sampler's
/// exp/ln come from the platform math library, otherwise from `libm`; the
/// feature is tied explicitly so a build's draws never depend on what other
/// crates in the graph switch on.
pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn uniforms(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::Rng;
    (0..n).map(|_| rng.random::<f64>()).collect()
}
