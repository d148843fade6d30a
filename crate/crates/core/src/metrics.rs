//! Averaged noise reduction (ANR).
//!
//! `A_e` and `A_d` are one-pole smoothers of `|e(n)|` and `|d(n)|`, and the
//! reported reduction is `20·log10(A_e/A_d)` in dB. Samples where `A_d` is
//! still zero are gaps, stored as NaN.

use alloc::vec::Vec;

use crate::error::ConfigError;

/// Floor applied when the residual amplitude underflows.
pub const ANR_FLOOR_DB: f64 = -150.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AnrTrace {
    pub a_e: f64,
    pub a_d: f64,
    /// ANR per sample in dB; NaN marks a gap.
    pub anr_db: Vec<f64>,
    pub xi: f64,
}

impl AnrTrace {
    pub fn new(xi: f64) -> Result<Self, ConfigError> {
        Self::with_capacity(xi, 0)
    }

    pub fn with_capacity(xi: f64, capacity: usize) -> Result<Self, ConfigError> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(ConfigError::OutOfRange {
                field: "xi",
                value: xi,
                expected: "0 < xi < 1",
            });
        }
        Ok(AnrTrace {
            a_e: 0.0,
            a_d: 0.0,
            anr_db: Vec::with_capacity(capacity),
            xi,
        })
    }

    /// Advances both smoothers, appends and returns the current ANR.
    pub fn anr_step(&mut self, e: f64, d: f64) -> f64 {
        self.a_e = self.xi * self.a_e + (1.0 - self.xi) * e.abs();
        self.a_d = self.xi * self.a_d + (1.0 - self.xi) * d.abs();
        let anr = anr_db(self.a_e, self.a_d);
        self.anr_db.push(anr);
        anr
    }

    pub fn len(&self) -> usize {
        self.anr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anr_db.is_empty()
    }
}

/// `20·log10(a_e/a_d)`, clamped below at [`ANR_FLOOR_DB`]; NaN when `a_d = 0`.
pub fn anr_db(a_e: f64, a_d: f64) -> f64 {
    if !(a_d > 0.0) {
        return f64::NAN;
    }
    let db = 20.0 * libm::log10(a_e / a_d);
    if db.is_nan() {
        db
    } else {
        db.max(ANR_FLOOR_DB)
    }
}

/// Pointwise mean ANR across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMean {
    /// Mean over non-diverged trials; NaN where any contributing trial has a
    /// gap, and everywhere when every trial diverged.
    pub mean_db: Vec<f64>,
    pub trials: usize,
    pub diverged: usize,
}

impl EnsembleMean {
    pub fn is_fully_divergent(&self) -> bool {
        self.trials > 0 && self.diverged == self.trials
    }

    pub fn converged_trials(&self) -> usize {
        self.trials - self.diverged
    }
}

/// Averages `(series, diverged)` pairs in dB, skipping diverged trials.
///
/// Every series must have the same length.
pub fn ensemble_average<'a, I>(traces: I) -> Result<EnsembleMean, ConfigError>
where
    I: IntoIterator<Item = (&'a [f64], bool)>,
{
    let mut sum: Vec<f64> = Vec::new();
    let mut len = None;
    let mut trials = 0;
    let mut diverged = 0;
    for (series, is_diverged) in traces {
        match len {
            None => {
                len = Some(series.len());
                sum.resize(series.len(), 0.0);
            }
            Some(n) if n != series.len() => {
                return Err(ConfigError::LengthMismatch {
                    field: "traces",
                    expected: n,
                    found: series.len(),
                });
            }
            Some(_) => {}
        }
        trials += 1;
        if is_diverged {
            diverged += 1;
            continue;
        }
        for (acc, v) in sum.iter_mut().zip(series) {
            *acc += v;
        }
    }
    if trials == 0 {
        return Err(ConfigError::Empty { field: "traces" });
    }
    let used = (trials - diverged) as f64;
    let mean_db = if used == 0.0 {
        sum.iter().map(|_| f64::NAN).collect()
    } else {
        sum.into_iter().map(|s| s / used).collect()
    };
    Ok(EnsembleMean {
        mean_db,
        trials,
        diverged,
    })
}
