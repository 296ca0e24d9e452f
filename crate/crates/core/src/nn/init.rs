use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, RomError};

/// `prod(shape)` draws from `N(0, 2 / fan_in)`, deterministic per seed.
pub fn he_normal_init(shape: &[usize], fan_in: usize, seed: u64) -> Result<Vec<f64>> {
    if fan_in == 0 {
        return Err(RomError::arg("fan-in must be positive"));
    }
    let n: usize = shape.iter().product();
    let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("finite positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Biases start at zero.
pub fn zero_bias(len: usize) -> Vec<f64> {
    vec![0.0; len]
}
