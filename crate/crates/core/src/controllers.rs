//! Filtered-x adaptive controllers.
//!
//! The recursive family (FxRLS, FxlogRLS, FxRLP, FxlogRLP) shares one
//! exponentially weighted rank-1 recursion and differs only in the scalar
//! error weighting `v(n)`:
//!
//! ```text
//! K(n) = v(n) P(n-1) x_s(n) / (λ + v(n) x_sᵀ(n) P(n-1) x_s(n))
//! w(n) = w(n-1) + K(n) e(n)
//! P(n) = λ⁻¹ (P(n-1) − K(n) x_sᵀ(n) P(n-1))
//! ```
//!
//! with `w(0) = 0` and `P(0) = δI`. The measured residual `e(n)` drives both
//! the weighting and the correction. FxLMP is the stochastic-gradient
//! baseline for the mean `p`-power cost.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::ConfigError;
use crate::paths::dot;

/// Weight magnitude above which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Controller disabled; weights stay at zero.
    Off,
    FxLmp,
    FxRls,
    FxLogRls,
    FxRlp,
    FxLogRlp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Off,
        Algorithm::FxLmp,
        Algorithm::FxRls,
        Algorithm::FxLogRls,
        Algorithm::FxRlp,
        Algorithm::FxLogRlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Off => "off",
            Algorithm::FxLmp => "fxlmp",
            Algorithm::FxRls => "fxrls",
            Algorithm::FxLogRls => "fxlogrls",
            Algorithm::FxRlp => "fxrlp",
            Algorithm::FxLogRlp => "fxlogrlp",
        }
    }

    /// Whether the algorithm uses the inverse-correlation recursion.
    pub fn is_recursive(self) -> bool {
        matches!(
            self,
            Algorithm::FxRls | Algorithm::FxLogRls | Algorithm::FxRlp | Algorithm::FxLogRlp
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or(ConfigError::UnknownAlgorithm)
    }
}

/// Per-algorithm tuning. Fields an algorithm does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Forgetting factor λ ∈ (0, 1).
    pub lambda: f64,
    /// Initial inverse-correlation scale, `P(0) = δI`.
    pub delta: f64,
    /// Regulariser added to the weighting denominator.
    pub tau: f64,
    /// Error power `p ∈ (1, 2]`.
    pub p: f64,
    /// FxLMP step size.
    pub mu: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 0.999,
            delta: 0.001,
            tau: 0.001,
            p: 1.3,
            mu: 0.0001,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self, algorithm: Algorithm) -> Result<(), ConfigError> {
        if algorithm.is_recursive() {
            if !(self.lambda > 0.0 && self.lambda < 1.0) {
                return Err(ConfigError::OutOfRange {
                    field: "lambda",
                    value: self.lambda,
                    expected: "0 < lambda < 1",
                });
            }
            if !(self.delta > 0.0 && self.delta.is_finite()) {
                return Err(ConfigError::OutOfRange {
                    field: "delta",
                    value: self.delta,
                    expected: "finite delta > 0",
                });
            }
            if !(self.tau >= 0.0 && self.tau.is_finite()) {
                return Err(ConfigError::OutOfRange {
                    field: "tau",
                    value: self.tau,
                    expected: "finite tau >= 0",
                });
            }
        }
        if matches!(
            algorithm,
            Algorithm::FxLmp | Algorithm::FxRlp | Algorithm::FxLogRlp
        ) && !(self.p > 1.0 && self.p <= 2.0)
        {
            return Err(ConfigError::OutOfRange {
                field: "p",
                value: self.p,
                expected: "1 < p <= 2",
            });
        }
        if algorithm == Algorithm::FxLmp && !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(ConfigError::OutOfRange {
                field: "mu",
                value: self.mu,
                expected: "finite mu > 0",
            });
        }
        Ok(())
    }
}

/// FxRLP weighting `|e|^p / (|e|² + τ)`.
///
/// With `τ = 0` and `e = 0` the quotient is undefined; the `p = 2` case then
/// takes its continuous value 1 and other powers return 0.
pub fn weight_fxrlp(e: f64, p: f64, tau: f64) -> f64 {
    let a = e.abs();
    let sq = a * a;
    // pow(a, 2) is not guaranteed to round like a*a
    let num = if p == 2.0 { sq } else { libm::pow(a, p) };
    let den = sq + tau;
    if den == 0.0 {
        return if p == 2.0 { 1.0 } else { 0.0 };
    }
    num / den
}

/// FxlogRLP weighting `log^(p-1)(1+|e|) / ((1+|e|)|e| + τ)`.
///
/// With `τ = 0` the quotient is undefined at `e = 0`; the function returns 0
/// there.
pub fn weight_fxlogrlp(e: f64, p: f64, tau: f64) -> f64 {
    let a = e.abs();
    let l = libm::log1p(a);
    let num = if p == 2.0 { l } else { libm::pow(l, p - 1.0) };
    let den = (1.0 + a) * a + tau;
    if den == 0.0 {
        return 0.0;
    }
    num / den
}

/// Result of one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Error weighting `v(n)` (1 for FxRLS, 0 for non-recursive algorithms).
    pub v: f64,
    /// `x_sᵀ P(n-1) x_s` (0 for non-recursive algorithms).
    pub quad: f64,
    /// Set when the step produced a non-finite value or weights beyond
    /// [`DIVERGENCE_LIMIT`].
    pub diverged: bool,
}

/// Weights, inverse-correlation matrix and tuning of one controller.
#[derive(Debug, Clone)]
pub struct ControllerState {
    algorithm: Algorithm,
    params: Hyperparams,
    w: Vec<f64>,
    /// Row-major `L×L`; empty for non-recursive algorithms.
    p: Vec<f64>,
    /// Scratch holding `P(n-1) x_s(n)` from the latest recursive step.
    px: Vec<f64>,
    diverged: bool,
}

impl ControllerState {
    /// `w(0) = 0` and, for the recursive family, `P(0) = δI`.
    pub fn new(algorithm: Algorithm, len: usize, params: Hyperparams) -> Result<Self, ConfigError> {
        if len == 0 {
            return Err(ConfigError::InvalidLength {
                field: "filter_len",
                value: 0,
                expected: "filter_len >= 1",
            });
        }
        params.validate(algorithm)?;
        let (p, px) = if algorithm.is_recursive() {
            let mut p = vec![0.0; len * len];
            for i in 0..len {
                p[i * len + i] = params.delta;
            }
            (p, vec![0.0; len])
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(ControllerState {
            algorithm,
            params,
            w: vec![0.0; len],
            p,
            px,
            diverged: false,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Row-major inverse-correlation matrix (empty unless recursive).
    pub fn inverse_correlation(&self) -> &[f64] {
        &self.p
    }

    /// `P(n-1) x_s(n)` from the most recent recursive step.
    pub fn last_gain_direction(&self) -> &[f64] {
        &self.px
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    /// Error weighting `v(e)` of the configured algorithm.
    pub fn weighting(&self, e: f64) -> f64 {
        let hp = &self.params;
        match self.algorithm {
            Algorithm::FxRls => 1.0,
            Algorithm::FxLogRls => weight_fxlogrlp(e, 2.0, hp.tau),
            Algorithm::FxRlp => weight_fxrlp(e, hp.p, hp.tau),
            Algorithm::FxLogRlp => weight_fxlogrlp(e, hp.p, hp.tau),
            Algorithm::Off | Algorithm::FxLmp => 0.0,
        }
    }

    /// Control output `u = wᵀx`.
    #[inline]
    pub fn output(&self, x: &[f64]) -> f64 {
        controller_output(&self.w, x)
    }

    /// Adapts with the filtered-reference window `x_s` and residual `e`.
    ///
    /// A diverged state is left untouched by further calls.
    pub fn step(&mut self, x_s: &[f64], e: f64) -> StepInfo {
        if self.diverged {
            return StepInfo {
                v: 0.0,
                quad: 0.0,
                diverged: true,
            };
        }
        match self.algorithm {
            Algorithm::Off => StepInfo {
                v: 0.0,
                quad: 0.0,
                diverged: false,
            },
            Algorithm::FxLmp => self.fxlmp_step(x_s, e),
            _ => self.rls_family_step(x_s, e),
        }
    }

    /// Shared recursion of the RLS family.
    pub fn rls_family_step(&mut self, x_s: &[f64], e: f64) -> StepInfo {
        assert!(self.algorithm.is_recursive(), "not a recursive algorithm");
        let n = self.w.len();
        assert_eq!(x_s.len(), n, "regressor length mismatch");
        let lambda = self.params.lambda;
        let inv_lambda = 1.0 / lambda;

        for (i, out) in self.px.iter_mut().enumerate() {
            *out = dot(&self.p[i * n..(i + 1) * n], x_s);
        }
        let quad = dot(x_s, &self.px);
        let v = self.weighting(e);
        let c = v / (lambda + v * quad);

        let mut guard = 0.0;
        let mut w_max: f64 = 0.0;
        for (wi, pxi) in self.w.iter_mut().zip(&self.px) {
            *wi += c * pxi * e;
            guard += *wi;
            w_max = w_max.max(wi.abs());
        }

        // K xᵀP = c (Px)(Px)ᵀ for symmetric P. Forming c·(px_i·px_j) makes the
        // (i, j) and (j, i) updates bit-identical, so P stays exactly symmetric.
        for (i, row) in self.p.chunks_exact_mut(n).enumerate() {
            let pxi = self.px[i];
            let mut row_sum = 0.0;
            for (pij, pxj) in row.iter_mut().zip(&self.px) {
                *pij = (*pij - c * (pxi * pxj)) * inv_lambda;
                row_sum += *pij;
            }
            guard += row_sum;
        }

        let diverged = !guard.is_finite() || !c.is_finite() || w_max > DIVERGENCE_LIMIT;
        self.diverged = diverged;
        StepInfo { v, quad, diverged }
    }

    /// `w ← w + μ·p·|e|^(p−1)·sign(e)·x_s`.
    pub fn fxlmp_step(&mut self, x_s: &[f64], e: f64) -> StepInfo {
        assert_eq!(self.algorithm, Algorithm::FxLmp, "not an FxLMP controller");
        assert_eq!(x_s.len(), self.w.len(), "regressor length mismatch");
        let hp = &self.params;
        let g = if e == 0.0 {
            0.0
        } else {
            hp.mu * hp.p * libm::pow(e.abs(), hp.p - 1.0) * e.signum()
        };
        let mut guard = 0.0;
        let mut w_max: f64 = 0.0;
        for (wi, xi) in self.w.iter_mut().zip(x_s) {
            *wi += g * xi;
            guard += *wi;
            w_max = w_max.max(wi.abs());
        }
        let diverged = !guard.is_finite() || w_max > DIVERGENCE_LIMIT;
        self.diverged = diverged;
        StepInfo {
            v: 0.0,
            quad: 0.0,
            diverged,
        }
    }
}

/// `u = wᵀx`.
#[inline]
pub fn controller_output(w: &[f64], x: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), x.len());
    dot(w, x)
}
