use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::Image;
use crate::error::{Error, Result};

/// Identifies the generator used for noise, recorded in report metadata.
pub const NOISE_GENERATOR: &str = "ChaCha20 (rand_chacha 0.9) + ziggurat normal (rand_distr 0.5)";

/// Additive white Gaussian noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let spec = Self { sigma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Returns `img + N(0, sigma^2)` with samples drawn in row-major order from a
/// generator seeded by `spec.seed`.
pub fn add_gaussian_noise(img: &Image, spec: NoiseSpec) -> Result<Image> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, spec.sigma)
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut out = img.clone();
    for v in out.data_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}
