//! One closed-loop simulation of the feed-forward plant.
//!
//! Per sample: the controller emits `u(n) = wᵀ(n-1)x(n)`, the secondary path
//! convolves the stored control history, the residual `e(n) = d(n) − y(n)`
//! drives the adaptation with the filtered reference `x_s(n)`, and the ANR
//! smoothers advance.

use alloc::vec::Vec;

use crate::alpha_stable::{sample_sas, NoiseSpec};
use crate::controllers::{Algorithm, ControllerState, Hyperparams};
use crate::error::ConfigError;
use crate::metrics::AnrTrace;
use crate::paths::{filtered_reference, fir_filter, plant_step, PathModel, Regressor};

/// Reference, primary noise and filtered reference for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignals {
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    pub x_s: Vec<f64>,
}

impl TrialSignals {
    pub fn from_reference(path: &PathModel, x: Vec<f64>) -> Result<Self, ConfigError> {
        let d = fir_filter(&path.primary, &x)?;
        let x_s = filtered_reference(path, &x)?;
        Ok(TrialSignals { x, d, x_s })
    }

    /// Draws an SαS reference and filters it through the plant.
    pub fn synthesize(path: &PathModel, noise: &NoiseSpec) -> Result<Self, ConfigError> {
        Self::from_reference(path, sample_sas(noise)?)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// What a trial observer sees at each adaptation step, before the update.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub n: usize,
    pub e: f64,
    pub d: f64,
    pub x_s: &'a [f64],
    pub state: &'a ControllerState,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trace: AnrTrace,
    /// Sample at which the controller diverged, if it did. Later ANR entries
    /// are NaN.
    pub diverged_at: Option<usize>,
    pub final_weights: Vec<f64>,
}

impl TrialOutcome {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Runs `algorithm` over the whole signal set.
pub fn run_trial(
    path: &PathModel,
    signals: &TrialSignals,
    algorithm: Algorithm,
    params: Hyperparams,
    filter_len: usize,
    xi: f64,
) -> Result<TrialOutcome, ConfigError> {
    run_trial_observed(path, signals, algorithm, params, filter_len, xi, |_| {})
}

/// Like [`run_trial`], calling `observe` before every adaptation step.
pub fn run_trial_observed<F>(
    path: &PathModel,
    signals: &TrialSignals,
    algorithm: Algorithm,
    params: Hyperparams,
    filter_len: usize,
    xi: f64,
    mut observe: F,
) -> Result<TrialOutcome, ConfigError>
where
    F: FnMut(StepView<'_>),
{
    let horizon = signals.len();
    if horizon == 0 {
        return Err(ConfigError::InvalidLength {
            field: "horizon",
            value: 0,
            expected: "horizon >= 1",
        });
    }
    if signals.d.len() != horizon || signals.x_s.len() != horizon {
        return Err(ConfigError::LengthMismatch {
            field: "signals",
            expected: horizon,
            found: signals.d.len().min(signals.x_s.len()),
        });
    }
    let mut state = ControllerState::new(algorithm, filter_len, params)?;
    let mut trace = AnrTrace::with_capacity(xi, horizon)?;
    let mut x_reg = Regressor::new(filter_len);
    let mut xs_reg = Regressor::new(filter_len);
    let mut u_hist = Regressor::new(path.secondary.len());
    let mut diverged_at = None;

    for n in 0..horizon {
        x_reg.push(signals.x[n]);
        xs_reg.push(signals.x_s[n]);
        u_hist.push(state.output(x_reg.taps()));
        let d = signals.d[n];
        let e = plant_step(&path.secondary, &u_hist, d);
        if !e.is_finite() {
            diverged_at = Some(n);
            break;
        }
        observe(StepView {
            n,
            e,
            d,
            x_s: xs_reg.taps(),
            state: &state,
        });
        let info = state.step(xs_reg.taps(), e);
        trace.anr_step(e, d);
        if info.diverged {
            diverged_at = Some(n);
            break;
        }
    }
    trace.anr_db.resize(horizon, f64::NAN);

    Ok(TrialOutcome {
        trace,
        diverged_at,
        final_weights: state.weights().to_vec(),
    })
}
