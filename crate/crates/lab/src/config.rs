//! Experiment configuration (TOML).
//!
//! ```toml
//! base_seed = 2024
//! filter_len = 128
//! horizon = 50000
//! trials = 50
//! xi = 0.999
//!
//! [noise]
//! alpha = 1.35
//! scale = 1.0
//!
//! [paths]
//! source = "synthetic"
//! seed = 1
//!
//! [defaults]
//! lambda = 0.999
//! p = 1.3
//!
//! [[algorithms]]
//! name = "fxlogrlp"
//! ```

use std::path::{Path, PathBuf};

use anc_core::{Algorithm, ConfigError, Hyperparams, NoiseSpec, PathModel, SyntheticPaths};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::files;

/// Environment variable overriding `base_seed`.
pub const SEED_ENV: &str = "ANC_LAB_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_seed: u64,
    pub filter_len: usize,
    pub horizon: usize,
    pub trials: usize,
    pub xi: f64,
    pub noise: NoiseConfig,
    pub paths: PathsConfig,
    #[serde(default)]
    pub defaults: HyperparamsConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub alpha: f64,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathsConfig {
    Synthetic(SyntheticConfig),
    /// Coefficients read from a path file (see [`crate::files`]).
    File {
        file: PathBuf,
        /// Separate secondary-path model; defaults to the `secondary_estimate`
        /// section of `file`, or the exact secondary path.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        estimate_file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub primary_len: usize,
    pub secondary_len: usize,
    pub primary_delay: usize,
    pub secondary_delay: usize,
    pub primary_decay: f64,
    pub secondary_decay: f64,
    pub primary_gain: f64,
    pub secondary_gain: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticPaths::default().into()
    }
}

impl From<SyntheticPaths> for SyntheticConfig {
    fn from(s: SyntheticPaths) -> Self {
        SyntheticConfig {
            seed: s.seed,
            primary_len: s.primary_len,
            secondary_len: s.secondary_len,
            primary_delay: s.primary_delay,
            secondary_delay: s.secondary_delay,
            primary_decay: s.primary_decay,
            secondary_decay: s.secondary_decay,
            primary_gain: s.primary_gain,
            secondary_gain: s.secondary_gain,
        }
    }
}

impl From<SyntheticConfig> for SyntheticPaths {
    fn from(s: SyntheticConfig) -> Self {
        SyntheticPaths {
            seed: s.seed,
            primary_len: s.primary_len,
            secondary_len: s.secondary_len,
            primary_delay: s.primary_delay,
            secondary_delay: s.secondary_delay,
            primary_decay: s.primary_decay,
            secondary_decay: s.secondary_decay,
            primary_gain: s.primary_gain,
            secondary_gain: s.secondary_gain,
        }
    }
}

/// Shared tuning; every field can be overridden per algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperparamsConfig {
    pub lambda: f64,
    pub delta: f64,
    pub tau: f64,
    pub p: f64,
    pub mu: f64,
}

impl Default for HyperparamsConfig {
    fn default() -> Self {
        let h = Hyperparams::default();
        HyperparamsConfig {
            lambda: h.lambda,
            delta: h.delta,
            tau: h.tau,
            p: h.p,
            mu: h.mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// One of `fxlmp`, `fxrls`, `fxlogrls`, `fxrlp`, `fxlogrlp`, `off`.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

impl AlgorithmConfig {
    pub fn named(algorithm: Algorithm) -> Self {
        AlgorithmConfig {
            name: algorithm.name().to_string(),
            lambda: None,
            delta: None,
            tau: None,
            p: None,
            mu: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Append one `anr_db_trial_k` column per trial to each CSV.
    pub per_trial_columns: bool,
    /// Write a gnuplot script next to the CSV files.
    pub plot_script: bool,
}

/// An algorithm with its fully resolved tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedAlgorithm {
    pub algorithm: Algorithm,
    pub params: Hyperparams,
}

/// Error power paired with each exponent of the reference comparison.
pub fn paired_p(alpha: f64) -> Option<f64> {
    if alpha == 1.35 {
        Some(1.3)
    } else if alpha == 1.55 {
        Some(1.5)
    } else {
        None
    }
}

/// Roster of the reference comparison.
pub const COMPARISON_ROSTER: [Algorithm; 5] = [
    Algorithm::FxLmp,
    Algorithm::FxRls,
    Algorithm::FxLogRls,
    Algorithm::FxRlp,
    Algorithm::FxLogRlp,
];

impl ExperimentConfig {
    /// Reference comparison at `alpha` (1.35 or 1.55).
    pub fn preset(alpha: f64) -> Result<Self> {
        let p = paired_p(alpha).ok_or_else(|| {
            LabError::Invalid(format!(
                "no reference pairing for alpha = {alpha} (expected 1.35 or 1.55)"
            ))
        })?;
        Ok(ExperimentConfig {
            base_seed: 2024,
            filter_len: 128,
            horizon: 50_000,
            trials: 50,
            xi: 0.999,
            noise: NoiseConfig { alpha, scale: 1.0 },
            paths: PathsConfig::Synthetic(SyntheticConfig::default()),
            defaults: HyperparamsConfig {
                p,
                ..HyperparamsConfig::default()
            },
            algorithms: COMPARISON_ROSTER
                .iter()
                .map(|&a| AlgorithmConfig::named(a))
                .collect(),
            output: OutputConfig::default(),
        })
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let mut config = Self::from_toml(&text, path)?;
        // relative path files resolve against the config file's directory
        if let PathsConfig::File {
            file,
            estimate_file,
        } = &mut config.paths
        {
            let base = path.parent().unwrap_or(Path::new("."));
            if file.is_relative() {
                *file = base.join(&*file);
            }
            if let Some(est) = estimate_file {
                if est.is_relative() {
                    *est = base.join(&*est);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration always serialises")
    }

    /// Applies `ANC_LAB_SEED` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.base_seed = raw.trim().parse().map_err(|_| {
                LabError::Invalid(format!("{SEED_ENV} = {raw:?} is not an unsigned integer"))
            })?;
        }
        Ok(())
    }

    /// Noise template for trial `index`.
    pub fn noise_spec(&self, trial: usize) -> Result<NoiseSpec> {
        Ok(NoiseSpec::new(
            self.noise.alpha,
            self.noise.scale,
            anc_core::derive_seed(self.base_seed, trial as u64),
            self.horizon,
        )?)
    }

    pub fn resolve_algorithms(&self) -> Result<Vec<ResolvedAlgorithm>> {
        if self.algorithms.is_empty() {
            return Err(ConfigError::Empty {
                field: "algorithms",
            }
            .into());
        }
        self.algorithms
            .iter()
            .map(|a| {
                let algorithm: Algorithm = a
                    .name
                    .parse()
                    .map_err(|_| LabError::Invalid(format!("unknown algorithm `{}`", a.name)))?;
                let d = &self.defaults;
                let params = Hyperparams {
                    lambda: a.lambda.unwrap_or(d.lambda),
                    delta: a.delta.unwrap_or(d.delta),
                    tau: a.tau.unwrap_or(d.tau),
                    p: a.p.unwrap_or(d.p),
                    mu: a.mu.unwrap_or(d.mu),
                };
                params.validate(algorithm)?;
                Ok(ResolvedAlgorithm { algorithm, params })
            })
            .collect()
    }

    pub fn build_paths(&self) -> Result<PathModel> {
        match &self.paths {
            PathsConfig::Synthetic(s) => Ok(SyntheticPaths::from(*s).generate()?),
            PathsConfig::File {
                file,
                estimate_file,
            } => files::load_path_model(file, estimate_file.as_deref()),
        }
    }

    /// Checks every field without touching the file system.
    pub fn validate(&self) -> Result<()> {
        if self.filter_len == 0 {
            return Err(ConfigError::InvalidLength {
                field: "filter_len",
                value: 0,
                expected: "filter_len >= 1",
            }
            .into());
        }
        if self.horizon == 0 {
            return Err(ConfigError::InvalidLength {
                field: "horizon",
                value: 0,
                expected: "horizon >= 1",
            }
            .into());
        }
        if self.trials == 0 {
            return Err(ConfigError::InvalidLength {
                field: "trials",
                value: 0,
                expected: "trials >= 1",
            }
            .into());
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(ConfigError::OutOfRange {
                field: "xi",
                value: self.xi,
                expected: "0 < xi < 1",
            }
            .into());
        }
        NoiseSpec::new(self.noise.alpha, self.noise.scale, 0, self.horizon)?;
        if let PathsConfig::Synthetic(s) = &self.paths {
            SyntheticPaths::from(*s).validate()?;
        }
        self.resolve_algorithms()?;
        Ok(())
    }
}
