//! Trial orchestration and ensemble comparison.
//!
//! Every (algorithm, trial) cell is independent: trial `k` draws its reference
//! from `derive_seed(base_seed, k)`, so all algorithms see the same noise
//! realisation and results do not depend on roster order or thread count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anc_core::{
    ensemble_average, run_trial_observed, Algorithm, EnsembleMean, PathModel, Snapshot,
    TrialOutcome, TrialSignals,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ResolvedAlgorithm};
use crate::error::{LabError, Result};
use crate::files;

/// ANR level used for the convergence-time column of the summary.
pub const THRESHOLD_DB: f64 = -5.0;
/// Window over which the final plateau slope is measured.
pub const SLOPE_WINDOW: usize = 10_000;

/// Runs trial `trial` of one algorithm.
pub fn run_trial(
    config: &ExperimentConfig,
    path: &PathModel,
    algorithm: &ResolvedAlgorithm,
    trial: usize,
) -> Result<TrialOutcome> {
    let signals = TrialSignals::synthesize(path, &config.noise_spec(trial)?)?;
    Ok(run_trial_observed(
        path,
        &signals,
        algorithm.algorithm,
        algorithm.params,
        config.filter_len,
        config.xi,
        |_| {},
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub diverged: usize,
    /// Mean ANR at the last sample (NaN when every trial diverged).
    pub final_anr_db: f64,
    /// First sample at which the mean ANR reaches [`THRESHOLD_DB`].
    pub samples_to_threshold: Option<usize>,
    /// Change of the mean ANR over the final [`SLOPE_WINDOW`] samples.
    pub plateau_slope_db: f64,
}

impl AlgorithmSummary {
    fn from_mean(algorithm: Algorithm, mean: &EnsembleMean) -> Self {
        let series = &mean.mean_db;
        let last = series.len() - 1;
        let plateau_slope_db = if series.len() > SLOPE_WINDOW {
            series[last] - series[last - SLOPE_WINDOW]
        } else {
            f64::NAN
        };
        AlgorithmSummary {
            algorithm,
            trials: mean.trials,
            diverged: mean.diverged,
            final_anr_db: series[last],
            samples_to_threshold: series.iter().position(|&v| v <= THRESHOLD_DB),
            plateau_slope_db,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlgorithmResult {
    pub resolved: ResolvedAlgorithm,
    pub mean: EnsembleMean,
    pub summary: AlgorithmSummary,
    /// Per-trial outcomes in trial order.
    pub trials: Vec<TrialOutcome>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub config: ExperimentConfig,
    pub results: Vec<AlgorithmResult>,
}

impl Comparison {
    pub fn result(&self, algorithm: Algorithm) -> Option<&AlgorithmResult> {
        self.results
            .iter()
            .find(|r| r.resolved.algorithm == algorithm)
    }
}

/// Runs every (algorithm × trial) cell and averages per algorithm.
///
/// `threads = None` uses rayon's default pool size.
pub fn run_comparison(config: &ExperimentConfig, threads: Option<usize>) -> Result<Comparison> {
    config.validate()?;
    let roster = config.resolve_algorithms()?;
    let path = config.build_paths()?;

    let cells: Vec<(usize, usize)> = (0..roster.len())
        .flat_map(|a| (0..config.trials).map(move |t| (a, t)))
        .collect();
    let run = || -> Result<Vec<TrialOutcome>> {
        cells
            .par_iter()
            .map(|&(a, t)| run_trial(config, &path, &roster[a], t))
            .collect()
    };
    let mut outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| LabError::Invalid(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    }
    .into_iter();

    let mut results = Vec::with_capacity(roster.len());
    for resolved in roster {
        let trials: Vec<TrialOutcome> = outcomes.by_ref().take(config.trials).collect();
        let mean = ensemble_average(
            trials
                .iter()
                .map(|o| (o.trace.anr_db.as_slice(), o.diverged())),
        )?;
        let summary = AlgorithmSummary::from_mean(resolved.algorithm, &mean);
        results.push(AlgorithmResult {
            resolved,
            mean,
            summary,
            trials,
        });
    }
    Ok(Comparison {
        config: config.clone(),
        results,
    })
}

/// Records stability snapshots of one trial at every `every`-th step within
/// the final `last` samples.
pub fn record_snapshots(
    config: &ExperimentConfig,
    path: &PathModel,
    algorithm: &ResolvedAlgorithm,
    trial: usize,
    last: usize,
    every: usize,
) -> Result<(Vec<Snapshot>, TrialOutcome)> {
    if !algorithm.algorithm.is_recursive() {
        return Err(LabError::Invalid(format!(
            "stability snapshots need a recursive algorithm, got `{}`",
            algorithm.algorithm
        )));
    }
    let every = every.max(1);
    let start = config.horizon.saturating_sub(last);
    let signals = TrialSignals::synthesize(path, &config.noise_spec(trial)?)?;
    let lambda = algorithm.params.lambda;
    let mut snapshots = Vec::new();
    let outcome = run_trial_observed(
        path,
        &signals,
        algorithm.algorithm,
        algorithm.params,
        config.filter_len,
        config.xi,
        |view| {
            if view.n >= start && (view.n - start) % every == 0 {
                snapshots.push(Snapshot::from_matrix(
                    view.n,
                    view.state.weighting(view.e),
                    lambda,
                    view.state.inverse_correlation(),
                    view.x_s,
                ));
            }
        },
    )?;
    Ok((snapshots, outcome))
}

fn alpha_tag(alpha: f64) -> String {
    format!("alpha{alpha}")
}

/// CSV file name for roster entry `index`.
pub fn series_file_name(cmp: &Comparison, index: usize) -> String {
    let name = cmp.results[index].resolved.algorithm.name();
    let duplicated = cmp
        .results
        .iter()
        .filter(|r| r.resolved.algorithm.name() == name)
        .count()
        > 1;
    let tag = alpha_tag(cmp.config.noise.alpha);
    if duplicated {
        format!("anr_{name}_{index}_{tag}.csv")
    } else {
        format!("anr_{name}_{tag}.csv")
    }
}

fn fmt_opt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        String::new()
    }
}

pub fn summary_csv(cmp: &Comparison) -> String {
    let mut s = String::from(
        "algorithm,trials,diverged,final_anr_db,samples_to_minus5db,plateau_slope_db_per_1e4\n",
    );
    for r in &cmp.results {
        let m = &r.summary;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            m.algorithm,
            m.trials,
            m.diverged,
            fmt_opt(m.final_anr_db),
            m.samples_to_threshold
                .map(|n| n.to_string())
                .unwrap_or_default(),
            fmt_opt(m.plateau_slope_db)
        );
    }
    s
}

/// Human-readable summary table.
pub fn summary_table(cmp: &Comparison) -> String {
    let mut s = format!(
        "alpha = {}, trials = {}, horizon = {}\n{:<10} {:>9} {:>14} {:>16} {:>14}\n",
        cmp.config.noise.alpha,
        cmp.config.trials,
        cmp.config.horizon,
        "algorithm",
        "diverged",
        "final ANR dB",
        "samples to -5dB",
        "slope dB/1e4"
    );
    for r in &cmp.results {
        let m = &r.summary;
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:>14} {:>16} {:>14}",
            m.algorithm.name(),
            format!("{}/{}", m.diverged, m.trials),
            if m.final_anr_db.is_finite() {
                format!("{:.2}", m.final_anr_db)
            } else {
                "diverged".into()
            },
            m.samples_to_threshold
                .map(|n| n.to_string())
                .unwrap_or_else(|| "never".into()),
            fmt_opt(m.plateau_slope_db)
        );
    }
    s
}

pub fn gnuplot_script(cmp: &Comparison) -> String {
    let mut s = format!(
        "set datafile separator ','\nset key top right\nset xlabel 'samples'\nset ylabel 'ANR (dB)'\nset title 'alpha = {}'\nplot ",
        cmp.config.noise.alpha
    );
    let lines: Vec<String> = (0..cmp.results.len())
        .map(|i| {
            format!(
                "'{}' using 1:2 with lines title '{}'",
                series_file_name(cmp, i),
                cmp.results[i].resolved.algorithm
            )
        })
        .collect();
    s.push_str(&lines.join(", \\\n     "));
    s.push('\n');
    s
}

/// Writes per-algorithm CSVs, the summary and (optionally) a gnuplot script
/// into `dir`. Returns the written paths.
pub fn write_outputs(cmp: &Comparison, dir: &Path) -> Result<Vec<PathBuf>> {
    files::create_dir(dir)?;
    let mut written = Vec::new();
    for (i, r) in cmp.results.iter().enumerate() {
        let path = dir.join(series_file_name(cmp, i));
        let trials: Vec<&[f64]> = if cmp.config.output.per_trial_columns {
            r.trials.iter().map(|t| t.trace.anr_db.as_slice()).collect()
        } else {
            Vec::new()
        };
        files::write_anr_csv(&path, &r.mean.mean_db, &trials)?;
        written.push(path);
    }
    let tag = alpha_tag(cmp.config.noise.alpha);
    let summary = dir.join(format!("summary_{tag}.csv"));
    files::write_text(&summary, &summary_csv(cmp))?;
    written.push(summary);
    if cmp.config.output.plot_script {
        let script = dir.join(format!("plot_{tag}.gp"));
        files::write_text(&script, &gnuplot_script(cmp))?;
        written.push(script);
    }
    Ok(written)
}
