//! Acceptance checks for the controllers, noise generator, metrics, stability
//! probe and experiment runner. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use anc_core::*;
use anc_lab::config::ExperimentConfig;
use anc_lab::experiment::{record_snapshots, run_comparison};
use anc_lab::Comparison;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn gaussian(seed: u64, n: usize) -> Vec<f64> {
    sample_sas(&NoiseSpec::new(2.0, std::f64::consts::FRAC_1_SQRT_2, seed, n).unwrap()).unwrap()
}

fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let l = b.len();
    for col in 0..l {
        let piv = (col..l)
            .max_by(|&i, &j| a[i * l + col].abs().total_cmp(&a[j * l + col].abs()))
            .unwrap();
        for k in 0..l {
            a.swap(col * l + k, piv * l + k);
        }
        b.swap(col, piv);
        for row in col + 1..l {
            let f = a[row * l + col] / a[col * l + col];
            for k in col..l {
                a[row * l + k] -= f * a[col * l + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; l];
    for row in (0..l).rev() {
        let s: f64 = (row + 1..l).map(|k| a[row * l + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * l + row];
    }
    x
}

fn oracle_equivalence(r: &mut Report) {
    let start = Instant::now();
    let (l, steps, lambda) = (4, 200, 0.999);
    let params = Hyperparams {
        lambda,
        ..Hyperparams::default()
    };
    let x = gaussian(11, steps);
    let noise = gaussian(12, steps);
    let w_true = [0.5, -0.25, 0.125, 0.3];
    let mut reg = Regressor::new(l);
    let mut state = ControllerState::new(Algorithm::FxRls, l, params).unwrap();
    let mut rm = vec![0.0; l * l];
    for i in 0..l {
        rm[i * l + i] = 1.0 / params.delta;
    }
    let mut theta = vec![0.0; l];
    for n in 0..steps {
        reg.push(x[n]);
        let xs = reg.taps();
        let d = controller_output(&w_true, xs) + 0.1 * noise[n];
        state.step(xs, d - state.output(xs));
        for i in 0..l {
            for j in 0..l {
                rm[i * l + j] = lambda * rm[i * l + j] + xs[i] * xs[j];
            }
            theta[i] = lambda * theta[i] + xs[i] * d;
        }
    }
    let batch = solve(rm, theta);
    let num: f64 = state.weights().iter().zip(&batch).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = batch.iter().map(|b| b * b).sum::<f64>().sqrt();
    let err = num / den;
    let secs = start.elapsed().as_secs_f64();
    r.check(
        "1 oracle equivalence",
        err <= 1e-6 && secs < 1.0,
        format!("FxRLS vs batch normal equations, relative error {err:.3e} (<= 1e-6), {secs:.3} s (< 1 s)"),
    );
}

fn reduction_identities(r: &mut Report) {
    let l = 16;
    let x = sample_sas(&NoiseSpec::new(1.35, 1.0, 21, 1000).unwrap()).unwrap();
    let pairs = [
        (
            "FxRLP(p=2, tau=0) vs FxRLS",
            (Algorithm::FxRlp, Hyperparams { p: 2.0, tau: 0.0, ..Hyperparams::default() }),
            Algorithm::FxRls,
        ),
        (
            "FxlogRLP(p=2) vs FxlogRLS",
            (Algorithm::FxLogRlp, Hyperparams { p: 2.0, ..Hyperparams::default() }),
            Algorithm::FxLogRls,
        ),
    ];
    for (label, (alg, hp), reference) in pairs {
        let mut a = ControllerState::new(alg, l, hp).unwrap();
        let mut b = ControllerState::new(reference, l, Hyperparams::default()).unwrap();
        let mut reg = Regressor::new(l);
        let mut worst: f64 = 0.0;
        for &xi in &x {
            reg.push(xi);
            let d = 0.6 * xi;
            let ea = d - a.output(reg.taps());
            let eb = d - b.output(reg.taps());
            a.step(reg.taps(), ea);
            b.step(reg.taps(), eb);
            for (p, q) in a.weights().iter().zip(b.weights()) {
                worst = worst.max((p - q).abs());
            }
        }
        r.check(
            "2 reduction identity",
            worst <= 1e-12,
            format!("{label}, max |Δw| over 1000 steps {worst:.3e} (<= 1e-12)"),
        );
    }
}

fn ordering_check(r: &mut Report, cmp: &Comparison, alpha: f64) {
    let fin = |alg| cmp.result(alg).unwrap().summary.final_anr_db;
    let (lrlp, lrls, rlp, lmp) = (
        fin(Algorithm::FxLogRlp),
        fin(Algorithm::FxLogRls),
        fin(Algorithm::FxRlp),
        fin(Algorithm::FxLmp),
    );
    let pass = lrlp <= lrls - 1.0 && lrls < rlp && rlp < lmp;
    r.check(
        &format!("3b ordering alpha={alpha}"),
        pass,
        format!(
            "final mean ANR FxlogRLP {lrlp:.2} < FxlogRLS {lrls:.2} < FxRLP {rlp:.2} < FxLMP {lmp:.2} dB, FxlogRLP margin {:.2} dB (>= 1)",
            lrls - lrlp
        ),
    );
    let t = |alg| cmp.result(alg).unwrap().summary.samples_to_threshold;
    let (t_rlp, t_lmp) = (t(Algorithm::FxRlp), t(Algorithm::FxLmp));
    let pass = match (t_rlp, t_lmp) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };
    r.check(
        &format!("3c convergence alpha={alpha}"),
        pass,
        format!("samples to -5 dB: FxRLP {t_rlp:?} < FxLMP {t_lmp:?}"),
    );
}

fn fig3_reproduction(r: &mut Report) {
    for alpha in [1.35, 1.55] {
        let config = ExperimentConfig::preset(alpha).unwrap();
        let start = Instant::now();
        let cmp = run_comparison(&config, None).unwrap();
        println!(
            "     alpha={alpha}: {} trials x {} samples in {:.0} s",
            config.trials,
            config.horizon,
            start.elapsed().as_secs_f64()
        );
        if alpha == 1.35 {
            let rls = &cmp.result(Algorithm::FxRls).unwrap().summary;
            r.check(
                "3a FxRLS divergence alpha=1.35",
                2 * rls.diverged > rls.trials,
                format!(
                    "{} of {} trials flagged divergent (> 50%), final mean ANR of the rest {:.2} dB",
                    rls.diverged, rls.trials, rls.final_anr_db
                ),
            );
        }
        ordering_check(r, &cmp, alpha);
    }
}

/// CDF of the standard SαS law from its characteristic function `exp(-|t|^α)`.
fn sas_cdf(alpha: f64, x: f64) -> f64 {
    let (upper, n) = (40.0, 8_000);
    let h = upper / n as f64;
    let f = |t: f64| {
        if t == 0.0 {
            x
        } else {
            (x * t).sin() * (-t.powf(alpha)).exp() / t
        }
    };
    let mut acc = f(0.0) + f(upper);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    0.5 + acc * h / 3.0 / std::f64::consts::PI
}

fn kolmogorov_bound(alpha: f64, samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let grid: Vec<f64> = (-3000..=3000).map(|k| k as f64 * 0.01).collect();
    let cdf: Vec<f64> = grid.iter().map(|&x| sas_cdf(alpha, x)).collect();
    let below = |x: f64| sorted.partition_point(|&s| s < x) as f64 / n;
    let at_or_below = |x: f64| sorted.partition_point(|&s| s <= x) as f64 / n;
    let last = grid.len() - 1;
    let mut worst = below(grid[0]).max(cdf[0]);
    worst = worst.max((1.0 - at_or_below(grid[last])).max(1.0 - cdf[last]));
    for i in 0..last {
        worst = worst
            .max(below(grid[i + 1]) - cdf[i])
            .max(cdf[i + 1] - at_or_below(grid[i]));
    }
    worst
}

fn noise_generator(r: &mut Report) {
    let n = 100_000;
    let g = sample_sas(&NoiseSpec::new(2.0, 1.0, 31, n).unwrap()).unwrap();
    let mean = g.iter().sum::<f64>() / n as f64;
    let var = g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    r.check(
        "4 noise alpha=2 variance",
        (var - 2.0).abs() <= 0.1,
        format!("sample variance {var:.4} (2 ± 5%)"),
    );

    let mut c = sample_sas(&NoiseSpec::new(1.0, 1.0, 32, n).unwrap()).unwrap();
    c.sort_by(f64::total_cmp);
    let (q1, q3) = (c[n / 4], c[3 * n / 4]);
    r.check(
        "4 noise alpha=1 quartiles",
        (q1 + 1.0).abs() <= 0.05 && (q3 - 1.0).abs() <= 0.05,
        format!("quartiles {q1:.4}, {q3:.4} (±1 ± 5%)"),
    );

    let s = sample_sas(&NoiseSpec::new(1.35, 1.0, 33, n).unwrap()).unwrap();
    let d = kolmogorov_bound(1.35, &s);
    r.check(
        "4 noise alpha=1.35 Kolmogorov distance",
        d <= 0.01,
        format!("distance to characteristic-function inversion {d:.4} (<= 0.01)"),
    );
}

fn stability(r: &mut Report) {
    let config = ExperimentConfig::preset(1.35).unwrap();
    let path = config.build_paths().unwrap();
    let alg = config
        .resolve_algorithms()
        .unwrap()
        .into_iter()
        .find(|a| a.algorithm == Algorithm::FxLogRlp)
        .unwrap();
    let (snaps, outcome) = record_snapshots(&config, &path, &alg, 0, 10_000, 1).unwrap();
    let report = stability_probe(&snaps).unwrap();
    let eigs: Vec<f64> = snaps.iter().map(Snapshot::rank_one_eigenvalue).collect();
    let in_range = eigs.iter().all(|&e| (0.0..1.0).contains(&e));
    let max_eig = eigs.iter().cloned().fold(0.0, f64::max);
    let final_anr = outcome.trace.anr_db.last().copied().unwrap_or(f64::NAN);
    r.check(
        "5 stability probe",
        !outcome.diverged() && snaps.len() == 10_000 && report.trace_bound < 1.0 && in_range,
        format!(
            "FxlogRLP final ANR {final_anr:.2} dB, mean trace ratio {:.4e} (< 1), rank-1 eigenvalues in [0, {max_eig:.4e}] (within [0,1)), lambda_max {:.4e}",
            report.trace_bound, report.max_eig_estimate
        ),
    );
}

fn metric_sanity(r: &mut Report) {
    let path = SyntheticPaths::default().generate().unwrap();
    let noise = NoiseSpec::new(1.35, 1.0, 41, 20_000).unwrap();
    let signals = TrialSignals::synthesize(&path, &noise).unwrap();
    let off = run_trial(&path, &signals, Algorithm::Off, Hyperparams::default(), 128, 0.999).unwrap();
    let defined: Vec<f64> = off.trace.anr_db.iter().copied().filter(|v| !v.is_nan()).collect();
    let first = off.trace.anr_db.iter().position(|v| !v.is_nan()).unwrap();
    r.check(
        "6 controller off",
        defined.iter().all(|&v| v == 0.0) && off.trace.anr_db[first..].iter().all(|v| !v.is_nan()),
        format!("{} samples at exactly 0 dB after the {first}-sample primary delay", defined.len()),
    );

    let e = sample_sas(&NoiseSpec::new(1.35, 1.0, 42, 20_000).unwrap()).unwrap();
    let d = sample_sas(&NoiseSpec::new(1.35, 1.0, 43, 20_000).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for c in [1e-6, 0.37, 1e6] {
        let mut a = AnrTrace::new(0.999).unwrap();
        let mut b = AnrTrace::new(0.999).unwrap();
        for (ei, di) in e.iter().zip(&d) {
            worst = worst.max((a.anr_step(*ei, *di) - b.anr_step(c * ei, c * di)).abs());
        }
    }
    r.check(
        "6 scale invariance",
        worst <= 1e-12,
        format!("max |ΔANR| under common scaling {worst:.3e} dB (<= 1e-12)"),
    );

    let mut t = AnrTrace::new(0.999).unwrap();
    let mut last = 0.0;
    for di in gaussian(44, 100_000) {
        last = t.anr_step(0.5 * di, di);
    }
    r.check(
        "6 constant-ratio limit",
        (last + 6.0206).abs() <= 0.01,
        format!("ANR after 1e5 samples {last:.4} dB (-6.0206 ± 0.01)"),
    );
}

fn determinism(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_anc-lab"))
            .args(["compare", "--alpha", "1.35", "--trials", "6", "--horizon", "5000", "--per-trial"])
            .args(["--threads", threads, "--out"])
            .arg(out)
            .env_remove("ANC_LAB_SEED")
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        let mut files: Vec<_> = std::fs::read_dir(out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap()))
            .collect::<Vec<_>>()
    };
    let a = run("1", &dir.path().join("a"));
    let b = run("4", &dir.path().join("b"));
    let c = run("4", &dir.path().join("c"));
    let csvs = a.iter().filter(|(n, _)| n.to_string_lossy().ends_with(".csv")).count();
    r.check(
        "7 determinism",
        a == b && b == c && csvs >= 6,
        format!("{csvs} CSV files byte-identical across runs with 1 and 4 threads"),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    oracle_equivalence(&mut r);
    reduction_identities(&mut r);
    noise_generator(&mut r);
    metric_sanity(&mut r);
    stability(&mut r);
    determinism(&mut r);
    fig3_reproduction(&mut r);
    println!("acceptance: {} failed", r.failures);
    if r.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
