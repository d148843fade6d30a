use std::path::PathBuf;
use std::process::ExitCode;

use anc_core::{sample_sas, stability_probe, Algorithm, NoiseSpec, SyntheticPaths};
use anc_lab::config::{ExperimentConfig, ResolvedAlgorithm};
use anc_lab::experiment::{self, run_comparison};
use anc_lab::{files, LabError, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anc-lab", version, about = "Filtered-x active impulsive noise control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run(RunArgs),
    /// Run the reference comparison preset at one alpha.
    Compare(CompareArgs),
    /// Synthetic acoustic path utilities.
    Paths {
        #[command(subcommand)]
        command: PathsCommand,
    },
    /// Dump SαS samples as one-column CSV.
    Noise(NoiseArgs),
    /// Record stability snapshots from one trial.
    Record(RecordArgs),
    /// Evaluate the mean-stability condition on a snapshot log.
    Stability {
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, required_unless_present = "emit_defaults")]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Print the reference configuration and exit.
    #[arg(long)]
    emit_defaults: bool,
    /// Alpha of the printed defaults (1.35 or 1.55).
    #[arg(long, default_value_t = 1.35)]
    alpha: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Include one column per trial in each CSV.
    #[arg(long)]
    per_trial: bool,
    /// Also write a gnuplot script.
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand)]
enum PathsCommand {
    /// Generate seeded synthetic primary and secondary paths.
    Gen(GenArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = SyntheticPaths::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    primary_len: usize,
    #[arg(long, default_value_t = 100)]
    secondary_len: usize,
    #[arg(long, default_value_t = SyntheticPaths::default().primary_delay)]
    primary_delay: usize,
    #[arg(long, default_value_t = SyntheticPaths::default().secondary_delay)]
    secondary_delay: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    length: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecordArgs {
    /// Configuration file; the reference preset is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1.35)]
    alpha: f64,
    #[arg(long, default_value = "fxlogrlp")]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Number of final samples to record.
    #[arg(long, default_value_t = 10_000)]
    last: usize,
    /// Record every n-th step.
    #[arg(long, default_value_t = 1)]
    every: usize,
    #[arg(long)]
    out: PathBuf,
}

fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    config.apply_env()?;
    Ok(config)
}

fn compare_and_write(config: &ExperimentConfig, out: &std::path::Path, threads: Option<usize>) -> Result<()> {
    let cmp = run_comparison(config, threads)?;
    let written = experiment::write_outputs(&cmp, out)?;
    print!("{}", experiment::summary_table(&cmp));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            if args.emit_defaults {
                print!("{}", ExperimentConfig::preset(args.alpha)?.to_toml());
                return Ok(());
            }
            let path = args.config.expect("clap enforces --config");
            let config = load_config(&path)?;
            compare_and_write(&config, &args.out, args.threads)
        }
        Command::Compare(args) => {
            let mut config = ExperimentConfig::preset(args.alpha)?;
            config.apply_env()?;
            if let Some(t) = args.trials {
                config.trials = t;
            }
            if let Some(h) = args.horizon {
                config.horizon = h;
            }
            config.output.per_trial_columns = args.per_trial;
            config.output.plot_script = args.plot;
            compare_and_write(&config, &args.out, args.threads)
        }
        Command::Paths {
            command: PathsCommand::Gen(args),
        } => {
            let spec = SyntheticPaths {
                seed: args.seed,
                primary_len: args.primary_len,
                secondary_len: args.secondary_len,
                primary_delay: args.primary_delay,
                secondary_delay: args.secondary_delay,
                ..SyntheticPaths::default()
            };
            let model = spec.generate()?;
            files::write_text(&args.out, &files::format_path_model(&model))?;
            println!("wrote {}", args.out.display());
            Ok(())
        }
        Command::Noise(args) => {
            let spec = NoiseSpec::new(args.alpha, args.scale, args.seed, args.length)?;
            let text = files::format_samples(&sample_sas(&spec)?);
            match args.out {
                Some(p) => files::write_text(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Record(args) => {
            let mut config = match &args.config {
                Some(p) => load_config(p)?,
                None => {
                    let mut c = ExperimentConfig::preset(args.alpha)?;
                    c.apply_env()?;
                    c
                }
            };
            config.validate()?;
            let algorithm: Algorithm = args
                .algorithm
                .parse()
                .map_err(|_| LabError::Invalid(format!("unknown algorithm `{}`", args.algorithm)))?;
            let resolved: ResolvedAlgorithm = config
                .resolve_algorithms()?
                .into_iter()
                .find(|a| a.algorithm == algorithm)
                .ok_or_else(|| {
                    LabError::Invalid(format!("`{algorithm}` is not in the configured roster"))
                })?;
            config.algorithms.retain(|a| a.name.eq_ignore_ascii_case(algorithm.name()));
            let path = config.build_paths()?;
            let (snaps, outcome) =
                experiment::record_snapshots(&config, &path, &resolved, args.trial, args.last, args.every)?;
            files::write_text(&args.out, &files::format_snapshots(&snaps))?;
            println!(
                "recorded {} snapshots{} -> {}",
                snaps.len(),
                if outcome.diverged() { " (trial diverged)" } else { "" },
                args.out.display()
            );
            Ok(())
        }
        Command::Stability { run } => {
            let snaps = files::read_snapshots(&run)?;
            let report = stability_probe(&snaps)?;
            let max_single = snaps
                .iter()
                .map(|s| s.rank_one_eigenvalue())
                .fold(0.0, f64::max);
            println!("snapshots          {}", report.snapshots);
            println!("window             {}..={}", report.window.0, report.window.1);
            println!("lambda_max(mean M) {:.6e}", report.max_eig_estimate);
            println!("mean trace ratio   {:.6e}", report.trace_bound);
            println!("max rank-1 eig     {:.6e}", max_single);
            println!("power iterations   {} (converged: {})", report.power_iterations, report.power_converged);
            println!("stable in mean     {}", report.is_stable());
            println!("trace bound < 1    {}", report.trace_bound_held());
            if report.non_exciting {
                println!("warning: snapshots carry no excitation");
            }
            if report.low_confidence {
                println!("warning: low confidence (fewer than {} snapshots)", anc_core::diagnostics::MIN_SNAPSHOTS);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
