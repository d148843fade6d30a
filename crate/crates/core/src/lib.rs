//! Filtered-x adaptive controllers for single-channel feed-forward active
//! noise control under impulsive noise.
//!
//! - [`alpha_stable`]: symmetric α-stable reference noise.
//! - [`paths`]: FIR primary/secondary paths and the plant residual.
//! - [`controllers`]: the weighted recursive family (FxRLS, FxlogRLS,
//!   FxRLP, FxlogRLP) and the FxLMP gradient baseline.
//! - [`metrics`]: averaged noise reduction and ensemble means.
//! - [`diagnostics`]: empirical mean-stability probe.
//! - [`trial`]: the closed-loop simulation of one trial.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod alpha_stable;
pub mod controllers;
pub mod diagnostics;
mod error;
pub mod metrics;
pub mod paths;
pub mod trial;

pub use alpha_stable::{derive_seed, sample_sas, NoiseSpec, SasSource};
pub use controllers::{
    controller_output, weight_fxlogrlp, weight_fxrlp, Algorithm, ControllerState, Hyperparams,
    StepInfo,
};
pub use diagnostics::{stability_probe, Snapshot, StabilityReport};
pub use error::ConfigError;
pub use metrics::{anr_db, ensemble_average, AnrTrace, EnsembleMean, ANR_FLOOR_DB};
pub use paths::{filtered_reference, fir_filter, plant_step, PathModel, Regressor, SyntheticPaths};
pub use trial::{run_trial, run_trial_observed, StepView, TrialOutcome, TrialSignals};
