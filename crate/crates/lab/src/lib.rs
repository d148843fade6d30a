//! Experiment harness for filtered-x active impulsive noise control:
//! TOML configuration, parallel deterministic trial orchestration, CSV and
//! path-file formats, and the `anc-lab` command line.

pub mod config;
pub mod error;
pub mod experiment;
pub mod files;

pub use config::{ExperimentConfig, ResolvedAlgorithm};
pub use error::{LabError, Result};
pub use experiment::{run_comparison, run_trial, Comparison};
