use anc_core::{Algorithm, SyntheticPaths};
use anc_lab::config::{AlgorithmConfig, ExperimentConfig, PathsConfig, SyntheticConfig};
use anc_lab::experiment::{run_comparison, write_outputs};

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(1.35).unwrap();
    c.filter_len = 16;
    c.horizon = 3000;
    c.trials = 4;
    c.paths = PathsConfig::Synthetic(SyntheticConfig {
        primary_len: 48,
        secondary_len: 16,
        ..SyntheticPaths::default().into()
    });
    c
}

fn series(cmp: &anc_lab::Comparison, alg: Algorithm) -> Vec<f64> {
    cmp.result(alg).unwrap().mean.mean_db.clone()
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[test]
fn thread_count_does_not_change_results() {
    let config = small_config();
    let one = run_comparison(&config, Some(1)).unwrap();
    let three = run_comparison(&config, Some(3)).unwrap();
    for alg in anc_lab::config::COMPARISON_ROSTER {
        assert!(same_bits(&series(&one, alg), &series(&three, alg)), "{alg}");
    }
}

#[test]
fn roster_order_does_not_change_results() {
    let config = small_config();
    let mut reversed = config.clone();
    reversed.algorithms.reverse();
    let a = run_comparison(&config, Some(2)).unwrap();
    let b = run_comparison(&reversed, Some(2)).unwrap();
    for alg in anc_lab::config::COMPARISON_ROSTER {
        assert!(same_bits(&series(&a, alg), &series(&b, alg)), "{alg}");
    }
}

#[test]
fn extending_the_horizon_preserves_the_prefix() {
    let config = small_config();
    let mut longer = config.clone();
    longer.horizon = 4500;
    let a = run_comparison(&config, None).unwrap();
    let b = run_comparison(&longer, None).unwrap();
    for alg in anc_lab::config::COMPARISON_ROSTER {
        let (sa, sb) = (series(&a, alg), series(&b, alg));
        assert!(same_bits(&sa, &sb[..sa.len()]), "{alg}");
    }
}

#[test]
fn controller_off_reports_zero_db() {
    let mut config = small_config();
    config.algorithms = vec![AlgorithmConfig::named(Algorithm::Off)];
    let cmp = run_comparison(&config, None).unwrap();
    let off = cmp.result(Algorithm::Off).unwrap();
    assert_eq!(off.summary.diverged, 0);
    // NaN while the primary-path delay keeps d at zero, then exactly 0 dB.
    let first = off.mean.mean_db.iter().position(|v| !v.is_nan()).unwrap();
    assert!(off.mean.mean_db[first..].iter().all(|&v| v == 0.0));
}

#[test]
fn written_outputs_are_reproducible() {
    let config = small_config();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let f1 = write_outputs(&run_comparison(&config, Some(1)).unwrap(), d1.path()).unwrap();
    let f2 = write_outputs(&run_comparison(&config, Some(2)).unwrap(), d2.path()).unwrap();
    assert_eq!(f1.len(), f2.len());
    for (a, b) in f1.iter().zip(&f2) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{}", a.display());
    }
}

#[test]
fn config_round_trips_through_toml() {
    let config = small_config();
    let text = config.to_toml();
    let back = ExperimentConfig::from_toml(&text, std::path::Path::new("c.toml")).unwrap();
    assert_eq!(back, config);
}

#[test]
fn unknown_keys_are_rejected() {
    let mut text = small_config().to_toml();
    text.push_str("\nbogus = 1\n");
    let err = ExperimentConfig::from_toml(&text, std::path::Path::new("c.toml")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
