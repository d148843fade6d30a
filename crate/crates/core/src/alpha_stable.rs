//! Symmetric α-stable (SαS) noise.
//!
//! Samples are drawn with the Chambers–Mallows–Stuck transform of a uniform
//! phase `V ~ U(-π/2, π/2)` and a unit exponential `W`:
//!
//! ```text
//! α ≠ 1:  X = sin(αV) / cos(V)^(1/α) · (cos((1-α)V) / W)^((1-α)/α)
//! α = 1:  X = tan(V)
//! ```
//!
//! which yields the standard law with characteristic function
//! `exp(-|t|^α)`. The requested scale is applied as the final multiply, so
//! `scale = c` is bit-identical to `c ×` the `scale = 1` sequence.
//!
//! The bit stream comes from ChaCha8 seeded with the 64-bit seed, which is
//! platform independent, and all transcendental functions go through `libm`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;

/// Parameters of an SαS source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Characteristic exponent, `0 < alpha <= 2`.
    pub alpha: f64,
    /// Dispersion, `> 0`.
    pub scale: f64,
    pub seed: u64,
    /// Number of samples, `>= 1`.
    pub length: usize,
}

impl NoiseSpec {
    pub fn new(alpha: f64, scale: f64, seed: u64, length: usize) -> Result<Self, ConfigError> {
        let spec = NoiseSpec {
            alpha,
            scale,
            seed,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(ConfigError::OutOfRange {
                field: "alpha",
                value: self.alpha,
                expected: "0 < alpha <= 2",
            });
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(ConfigError::OutOfRange {
                field: "scale",
                value: self.scale,
                expected: "finite scale > 0",
            });
        }
        if self.length == 0 {
            return Err(ConfigError::InvalidLength {
                field: "length",
                value: 0,
                expected: "length >= 1",
            });
        }
        Ok(())
    }
}

/// Streaming SαS generator.
#[derive(Debug, Clone)]
pub struct SasSource {
    rng: ChaCha8Rng,
    alpha: f64,
    scale: f64,
}

impl SasSource {
    pub fn new(alpha: f64, scale: f64, seed: u64) -> Result<Self, ConfigError> {
        NoiseSpec::new(alpha, scale, seed, 1)?;
        Ok(SasSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
            alpha,
            scale,
        })
    }

    /// Uniform on the open interval (0, 1).
    fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_sample(&mut self) -> f64 {
        let v = PI * (self.open_uniform() - 0.5);
        let w = -libm::log(self.open_uniform());
        standard_cms(self.alpha, v, w) * self.scale
    }
}

impl Iterator for SasSource {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_sample())
    }
}

/// Chambers–Mallows–Stuck map for β = 0 and unit scale.
fn standard_cms(alpha: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        return libm::tan(v);
    }
    let cos_v = libm::cos(v);
    let lead = libm::sin(alpha * v) / libm::pow(cos_v, 1.0 / alpha);
    let tail = libm::pow(libm::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
    lead * tail
}

/// Draws `spec.length` i.i.d. SαS samples.
pub fn sample_sas(spec: &NoiseSpec) -> Result<Vec<f64>, ConfigError> {
    spec.validate()?;
    let source = SasSource::new(spec.alpha, spec.scale, spec.seed)?;
    Ok(source.take(spec.length).collect())
}

/// Mixes a base seed and a stream index into an independent 64-bit seed
/// (SplitMix64 finalizer over a golden-ratio stride).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
