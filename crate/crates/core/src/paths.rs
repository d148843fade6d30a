//! Acoustic plant: FIR primary and secondary paths, the filtered reference
//! and the per-sample residual computation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;

/// `Σ a[k]·b[k]` over the common prefix, accumulated in four interleaved
/// lanes so the loop vectorises. The summation order is fixed.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn check_coeffs(field: &'static str, coeffs: &[f64]) -> Result<(), ConfigError> {
    if coeffs.is_empty() {
        return Err(ConfigError::Empty { field });
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(ConfigError::NonFinite { field });
    }
    Ok(())
}

/// Causal FIR convolution with zero initial conditions; the output has the
/// same length as the input.
pub fn fir_filter(coeffs: &[f64], input: &[f64]) -> Result<Vec<f64>, ConfigError> {
    check_coeffs("coeffs", coeffs)?;
    let mut out = vec![0.0; input.len()];
    for (n, y) in out.iter_mut().enumerate() {
        let taps = coeffs.len().min(n + 1);
        let mut acc = 0.0;
        for (k, c) in coeffs[..taps].iter().enumerate() {
            acc += c * input[n - k];
        }
        *y = acc;
    }
    Ok(out)
}

/// Primary path `p`, secondary path `s` and the secondary-path model `ŝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathModel {
    pub primary: Vec<f64>,
    pub secondary: Vec<f64>,
    pub secondary_estimate: Vec<f64>,
}

impl PathModel {
    pub fn new(
        primary: Vec<f64>,
        secondary: Vec<f64>,
        secondary_estimate: Vec<f64>,
    ) -> Result<Self, ConfigError> {
        check_coeffs("primary", &primary)?;
        check_coeffs("secondary", &secondary)?;
        check_coeffs("secondary_estimate", &secondary_estimate)?;
        if secondary_estimate.len() != secondary.len() {
            return Err(ConfigError::LengthMismatch {
                field: "secondary_estimate",
                expected: secondary.len(),
                found: secondary_estimate.len(),
            });
        }
        Ok(PathModel {
            primary,
            secondary,
            secondary_estimate,
        })
    }

    /// Paths with the secondary path identified exactly (`ŝ = s`).
    pub fn exact(primary: Vec<f64>, secondary: Vec<f64>) -> Result<Self, ConfigError> {
        let estimate = secondary.clone();
        Self::new(primary, secondary, estimate)
    }

    pub fn is_exactly_identified(&self) -> bool {
        self.secondary == self.secondary_estimate
    }

    /// Primary noise `d = p * x`.
    pub fn primary_noise(&self, x: &[f64]) -> Result<Vec<f64>, ConfigError> {
        fir_filter(&self.primary, x)
    }
}

/// Filtered reference `x_s = ŝ * x`.
pub fn filtered_reference(path: &PathModel, x: &[f64]) -> Result<Vec<f64>, ConfigError> {
    fir_filter(&path.secondary_estimate, x)
}

/// Tapped delay line holding the most recent `len` samples, newest first.
///
/// Backed by a mirrored ring of twice the length so the window is always one
/// contiguous slice.
#[derive(Debug, Clone)]
pub struct Regressor {
    buf: Vec<f64>,
    head: usize,
    len: usize,
}

impl Regressor {
    /// All-zero window of `len` taps; `len` must be at least 1.
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "regressor length must be positive");
        Regressor {
            buf: vec![0.0; 2 * len],
            head: 0,
            len,
        }
    }

    #[inline]
    pub fn push(&mut self, sample: f64) {
        self.head = if self.head == 0 {
            self.len - 1
        } else {
            self.head - 1
        };
        self.buf[self.head] = sample;
        self.buf[self.head + self.len] = sample;
    }

    /// `[s(n), s(n-1), …, s(n-len+1)]`.
    #[inline]
    pub fn taps(&self) -> &[f64] {
        &self.buf[self.head..self.head + self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Residual at the error microphone, `e(n) = d(n) − Σ_k s[k]·u(n−k)`.
///
/// `u_history` must already contain the current control output `u(n)` at
/// the front; windows shorter than `s` are treated as zero-padded.
#[inline]
pub fn plant_step(secondary: &[f64], u_history: &Regressor, d: f64) -> f64 {
    d - dot(secondary, u_history.taps())
}

/// Recipe for a seeded synthetic acoustic plant.
///
/// Each path is a pure delay followed by Gaussian taps under an exponentially
/// decaying envelope, normalised to unit energy and then scaled by its gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticPaths {
    pub seed: u64,
    pub primary_len: usize,
    pub secondary_len: usize,
    pub primary_delay: usize,
    pub secondary_delay: usize,
    /// Envelope time constant of the primary path, in samples.
    pub primary_decay: f64,
    /// Envelope time constant of the secondary path, in samples.
    pub secondary_decay: f64,
    /// L2 norm of the primary impulse response.
    pub primary_gain: f64,
    /// L2 norm of the secondary impulse response.
    pub secondary_gain: f64,
}

impl Default for SyntheticPaths {
    fn default() -> Self {
        SyntheticPaths {
            seed: 1,
            primary_len: 256,
            secondary_len: 100,
            primary_delay: 10,
            secondary_delay: 5,
            primary_decay: 12.0,
            secondary_decay: 4.0,
            primary_gain: 0.1,
            secondary_gain: 0.1,
        }
    }
}

impl SyntheticPaths {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, len, delay) in [
            ("primary_len", self.primary_len, self.primary_delay),
            ("secondary_len", self.secondary_len, self.secondary_delay),
        ] {
            if len == 0 || delay >= len {
                return Err(ConfigError::InvalidLength {
                    field,
                    value: len,
                    expected: "length >= 1 and greater than the pure delay",
                });
            }
        }
        for (field, value) in [
            ("primary_decay", self.primary_decay),
            ("secondary_decay", self.secondary_decay),
            ("primary_gain", self.primary_gain),
            ("secondary_gain", self.secondary_gain),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::OutOfRange {
                    field,
                    value,
                    expected: "finite value > 0",
                });
            }
        }
        Ok(())
    }

    /// Builds the plant with `ŝ = s`.
    pub fn generate(&self) -> Result<PathModel, ConfigError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let secondary = decaying_fir(
            &mut rng,
            self.secondary_len,
            self.secondary_delay,
            self.secondary_decay,
            self.secondary_gain,
        );
        let primary = decaying_fir(
            &mut rng,
            self.primary_len,
            self.primary_delay,
            self.primary_decay,
            self.primary_gain,
        );
        PathModel::exact(primary, secondary)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

fn decaying_fir(
    rng: &mut ChaCha8Rng,
    len: usize,
    delay: usize,
    decay: f64,
    gain: f64,
) -> Vec<f64> {
    let mut taps = vec![0.0; len];
    for (k, tap) in taps.iter_mut().enumerate().skip(delay) {
        let age = (k - delay) as f64;
        *tap = gaussian(rng) * libm::exp(-age / decay);
    }
    let energy = libm::sqrt(dot(&taps, &taps));
    if energy > 0.0 {
        taps.iter_mut().for_each(|t| *t *= gain / energy);
    }
    taps
}
