//! Forward degradation `f = K * u + n` with seeded Gaussian noise.
//!
//! Noise samples come from `ChaCha8Rng::seed_from_u64(seed)` pushed through
//! `rand_distr::StandardNormal`, one draw per pixel in storage order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::ImageField;
use crate::kernels::{convolve, kernel_spectrum, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation in gray levels (0–255 scale).
    pub sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { sigma: 3.0, seed: 0 }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma >= 0.0 && self.sigma.is_finite() {
            Ok(())
        } else {
            Err(invalid("sigma", format!("must be non-negative, got {}", self.sigma)))
        }
    }
}

pub fn add_gaussian_noise(field: &ImageField, spec: &NoiseSpec) -> Result<ImageField> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return Ok(field.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = field.clone();
    for x in out.data_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *x += spec.sigma * z;
    }
    Ok(out)
}

/// Blurs `clean` with `kernel` (periodic) and adds noise.
pub fn degrade(clean: &ImageField, kernel: &Kernel, spec: &NoiseSpec) -> Result<ImageField> {
    let ks = kernel_spectrum(kernel, clean.width(), clean.height())?;
    add_gaussian_noise(&convolve(clean, &ks)?, spec)
}
