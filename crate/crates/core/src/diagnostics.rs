//! Empirical mean-stability probe for the recursive controllers.
//!
//! Each recorded step contributes the rank-1 update matrix
//! `M = v·P·x_s·x_sᵀ / (λ + v·x_sᵀ·P·x_s)`. The probe averages these over a
//! window, estimates the largest eigenvalue of the average by power
//! iteration, and reports the averaged trace ratio
//! `x_sᵀPx_s / (λ/v + x_sᵀPx_s)`, which bounds it from above.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ConfigError;
use crate::paths::dot;

/// Snapshots below this count mark a report as low-confidence.
pub const MIN_SNAPSHOTS: usize = 100;
pub const POWER_TOLERANCE: f64 = 1e-8;
pub const POWER_MAX_ITERATIONS: usize = 20_000;

/// State of one recursive step, taken before `P` is updated.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Sample index of the step.
    pub n: usize,
    /// Error weighting `v(n)`.
    pub v: f64,
    pub lambda: f64,
    /// Filtered-reference window `x_s(n)`.
    pub x_s: Vec<f64>,
    /// `P(n-1)·x_s(n)`.
    pub p_x: Vec<f64>,
}

impl Snapshot {
    /// Builds a snapshot from a row-major `P(n-1)`.
    pub fn from_matrix(n: usize, v: f64, lambda: f64, p: &[f64], x_s: &[f64]) -> Self {
        let l = x_s.len();
        assert_eq!(p.len(), l * l, "P must be L×L");
        let p_x = (0..l).map(|i| dot(&p[i * l..(i + 1) * l], x_s)).collect();
        Snapshot {
            n,
            v,
            lambda,
            x_s: x_s.to_vec(),
            p_x,
        }
    }

    /// `x_sᵀ P x_s`.
    pub fn quad(&self) -> f64 {
        dot(&self.x_s, &self.p_x)
    }

    /// Scalar `v / (λ + v·x_sᵀPx_s)` multiplying `P x_s x_sᵀ`.
    pub fn coefficient(&self) -> f64 {
        self.v / (self.lambda + self.v * self.quad())
    }

    /// The single nonzero eigenvalue of the rank-1 update matrix, equal to
    /// its trace `v·q / (λ + v·q)` with `q = x_sᵀPx_s`.
    pub fn rank_one_eigenvalue(&self) -> f64 {
        let q = self.quad();
        let vq = self.v * q;
        if vq == 0.0 {
            return 0.0;
        }
        vq / (self.lambda + vq)
    }

    /// `q / (λ/v + q)`; identical to [`Self::rank_one_eigenvalue`] and 0
    /// when `v = 0`.
    pub fn trace_ratio(&self) -> f64 {
        if self.v == 0.0 {
            return 0.0;
        }
        let q = self.quad();
        q / (self.lambda / self.v + q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Largest eigenvalue of the window-averaged update matrix.
    pub max_eig_estimate: f64,
    /// Window average of the trace ratio.
    pub trace_bound: f64,
    /// First and last sample index averaged over.
    pub window: (usize, usize),
    pub snapshots: usize,
    pub power_iterations: usize,
    pub power_converged: bool,
    /// Fewer than [`MIN_SNAPSHOTS`] snapshots were available.
    pub low_confidence: bool,
    /// The averaged matrix vanished (no excitation).
    pub non_exciting: bool,
}

impl StabilityReport {
    /// `0 < λ_max < 2`: converges in the mean.
    pub fn is_stable(&self) -> bool {
        self.max_eig_estimate > 0.0 && self.max_eig_estimate < 2.0
    }

    /// The tighter trace bound stayed below one.
    pub fn trace_bound_held(&self) -> bool {
        self.trace_bound < 1.0
    }
}

/// Dense row-major mean of the rank-1 update matrices.
pub fn mean_update_matrix(snapshots: &[Snapshot]) -> Vec<f64> {
    let l = snapshots.first().map_or(0, |s| s.x_s.len());
    let mut m = vec![0.0; l * l];
    for s in snapshots {
        let c = s.coefficient();
        if c == 0.0 || !c.is_finite() {
            continue;
        }
        for i in 0..l {
            let ci = c * s.p_x[i];
            let row = &mut m[i * l..(i + 1) * l];
            for (mij, xj) in row.iter_mut().zip(&s.x_s) {
                *mij += ci * xj;
            }
        }
    }
    let count = snapshots.len().max(1) as f64;
    m.iter_mut().for_each(|v| *v /= count);
    m
}

/// Dominant eigenvalue of a square row-major matrix by power iteration.
///
/// Returns `(estimate, iterations, converged)`.
pub fn power_iteration(m: &[f64], dim: usize, tol: f64, max_iter: usize) -> (f64, usize, bool) {
    assert_eq!(m.len(), dim * dim);
    if dim == 0 {
        return (0.0, 0, true);
    }
    let mut b = vec![1.0 / libm::sqrt(dim as f64); dim];
    let mut y = vec![0.0; dim];
    let mut estimate = 0.0;
    for it in 1..=max_iter {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(&m[i * dim..(i + 1) * dim], &b);
        }
        let next = dot(&b, &y);
        let norm = libm::sqrt(dot(&y, &y));
        if norm == 0.0 {
            return (0.0, it, true);
        }
        b.iter_mut().zip(&y).for_each(|(bi, yi)| *bi = yi / norm);
        if it > 1 && (next - estimate).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) {
            return (next, it, true);
        }
        estimate = next;
    }
    (estimate, max_iter, false)
}

/// Stability statistics over the given snapshots.
pub fn stability_probe(snapshots: &[Snapshot]) -> Result<StabilityReport, ConfigError> {
    let first = snapshots
        .first()
        .ok_or(ConfigError::Empty { field: "snapshots" })?;
    let l = first.x_s.len();
    for s in snapshots {
        if s.x_s.len() != l || s.p_x.len() != l {
            return Err(ConfigError::LengthMismatch {
                field: "snapshots",
                expected: l,
                found: s.x_s.len().max(s.p_x.len()),
            });
        }
        if !s.v.is_finite() || s.x_s.iter().chain(&s.p_x).any(|v| !v.is_finite()) {
            return Err(ConfigError::NonFinite { field: "snapshots" });
        }
    }

    let trace_bound =
        snapshots.iter().map(Snapshot::trace_ratio).sum::<f64>() / snapshots.len() as f64;
    let m = mean_update_matrix(snapshots);
    let non_exciting = m.iter().all(|&v| v == 0.0);
    let (max_eig, iterations, converged) = if non_exciting {
        (0.0, 0, true)
    } else {
        power_iteration(&m, l, POWER_TOLERANCE, POWER_MAX_ITERATIONS)
    };

    let (lo, hi) = snapshots
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), s| (lo.min(s.n), hi.max(s.n)));
    Ok(StabilityReport {
        max_eig_estimate: max_eig.max(0.0),
        trace_bound,
        window: (lo, hi),
        snapshots: snapshots.len(),
        power_iterations: iterations,
        power_converged: converged,
        low_confidence: snapshots.len() < MIN_SNAPSHOTS,
        non_exciting,
    })
}
