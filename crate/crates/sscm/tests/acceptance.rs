//! Acceptance suite: every release-gating criterion as one test with one
//! printed pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the measured values.
//!
//! Criteria 1-5 and 7 share one deterministic 10,000-channel ensemble.

use std::process::Command;
use std::sync::OnceLock;

use sscm::ensemble::{bands, run_ensemble, EnsembleOutcome, ValidationReport};
use sscm::link::{draw_shadow, path_loss_nlos, LinkConfig};
use sscm::params::ModelParams;
use sscm::rng::RngStream;

const SEED: u64 = 42;
const ENSEMBLE_SIZE: usize = 10_000;

fn ensemble() -> &'static (EnsembleOutcome, ValidationReport) {
    static ENSEMBLE: OnceLock<(EnsembleOutcome, ValidationReport)> = OnceLock::new();
    ENSEMBLE.get_or_init(|| {
        let params = ModelParams::default();
        let outcome = run_ensemble(&params, SEED, ENSEMBLE_SIZE, true)
            .expect("ensemble generation must succeed");
        let report = ValidationReport::build(&outcome, &params, SEED, ENSEMBLE_SIZE, true);
        (outcome, report)
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[test]
fn criterion_1_median_rms_delay_spread() {
    let (_, report) = ensemble();
    let value = report.rms_delay_spread_ns.median;
    let (lo, hi) = bands::MEDIAN_RMS_DELAY_SPREAD_NS;
    let pass = value >= lo && value <= hi;
    println!(
        "[criterion 1] median omnidirectional RMS delay spread: {value:.2} ns in [{lo}, {hi}] ns {}",
        verdict(pass)
    );
    assert!(pass, "median RMS delay spread {value} outside [{lo}, {hi}]");
}

#[test]
fn criterion_2_rms_lobe_angular_spreads() {
    let (_, report) = ensemble();
    let az = report.rms_lobe_azimuth_spread_deg.mean;
    let el = report.rms_lobe_elevation_spread_deg.mean;
    let (lo, hi) = bands::MEAN_LOBE_AZ_SPREAD_DEG;
    let pass = az >= lo && az <= hi && el >= lo && el <= hi;
    println!(
        "[criterion 2] mean AOA RMS lobe spreads: azimuth {az:.2} deg, elevation {el:.2} deg in [{lo}, {hi}] deg {}",
        verdict(pass)
    );
    assert!(pass, "lobe spreads az={az} el={el} outside [{lo}, {hi}]");
}

#[test]
fn criterion_3_power_conservation() {
    let (outcome, _) = ensemble();
    let failures = outcome.invariants.power_conservation_failures;
    println!(
        "[criterion 3] power conservation over {ENSEMBLE_SIZE} realizations (temporal and per-side lobe sums, 1e-9 relative): {failures} violations {}",
        verdict(failures == 0)
    );
    assert_eq!(failures, 0, "{:?}", outcome.invariants.examples);
}

#[test]
fn criterion_4_cluster_gap_round_trip() {
    let (outcome, _) = ensemble();
    let failures = outcome.invariants.round_trip_failures;
    println!(
        "[criterion 4] PDP partition recovers generated clusters and powers on every realization: {failures} violations {}",
        verdict(failures == 0)
    );
    assert_eq!(failures, 0, "{:?}", outcome.invariants.examples);
}

#[test]
fn criterion_5_decay_constant_recovery() {
    let (_, report) = ensemble();
    let checks = [
        ("cluster decay [ns]", report.fitted_cluster_decay_ns, bands::CLUSTER_DECAY_NS),
        ("subpath decay [ns]", report.fitted_subpath_decay_ns, bands::SUBPATH_DECAY_NS),
        ("cluster intercept", report.fitted_cluster_p0, bands::CLUSTER_P0),
        ("subpath intercept", report.fitted_subpath_pi0, bands::SUBPATH_PI0),
    ];
    let pass = checks
        .iter()
        .all(|&(_, value, (lo, hi))| value >= lo && value <= hi);
    let detail: Vec<String> = checks
        .iter()
        .map(|&(name, value, (lo, hi))| format!("{name} {value:.3} in [{lo}, {hi}]"))
        .collect();
    println!(
        "[criterion 5] decay-constant recovery: {} {}",
        detail.join("; "),
        verdict(pass)
    );
    for (name, value, (lo, hi)) in checks {
        assert!(
            value >= lo && value <= hi,
            "{name} = {value} outside [{lo}, {hi}]"
        );
    }
}

#[test]
fn criterion_6_path_loss_spot_values() {
    let cfg = LinkConfig::default();
    let pl_1m = path_loss_nlos(&cfg, 1.0, 0.0).unwrap();
    let exact = pl_1m == 61.4;

    let mut rng = RngStream::from_seed(SEED);
    let n = 1_000_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let s = draw_shadow(&cfg, &mut rng).unwrap();
        sum += s;
        sum_sq += s * s;
    }
    let mean = sum / n as f64;
    let std = (sum_sq / n as f64 - mean * mean).sqrt();
    let std_ok = (std - 9.7).abs() < 0.1;
    println!(
        "[criterion 6] path loss at 1 m: {pl_1m} dB (exact 61.4: {exact}); shadow std over 1e6 draws: {std:.3} dB in 9.7 +/- 0.1 {}",
        verdict(exact && std_ok)
    );
    assert!(exact, "PL(1 m, 0) = {pl_1m}, expected exactly 61.4");
    assert!(std_ok, "shadow std {std} outside 9.7 +/- 0.1");
}

#[test]
fn criterion_7_structural_bounds() {
    let (outcome, _) = ensemble();
    let failures = outcome.invariants.structure_failures;
    println!(
        "[criterion 7] structural bounds on every realization (cluster/subpath/lobe counts, zero first delay, spacing law, void gaps): {failures} violations {}",
        verdict(failures == 0)
    );
    assert_eq!(failures, 0, "{:?}", outcome.invariants.examples);
}

#[test]
fn criterion_8_distribution_moments() {
    let n = 1_000_000usize;
    let nf = n as f64;
    let mut rng = RngStream::from_seed(SEED + 1);

    // uniform(0,1): mean 1/2 within 3 standard errors
    let mut sum = 0.0;
    for _ in 0..n {
        sum += rng.sample_uniform(0.0, 1.0).unwrap();
    }
    let uniform_mean = sum / nf;
    let uniform_ok = (uniform_mean - 0.5).abs() < 3.0 / (12f64.sqrt() * nf.sqrt());

    // exponential(83): mean within 3 standard errors
    let mut sum = 0.0;
    for _ in 0..n {
        sum += rng.sample_exponential(83.0).unwrap();
    }
    let exp_mean = sum / nf;
    let exp_ok = (exp_mean - 83.0).abs() < 3.0 * 83.0 / nf.sqrt();

    // normal(0,3): mean and std within 3 standard errors
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let x = rng.sample_normal(0.0, 3.0).unwrap();
        sum += x;
        sum_sq += x * x;
    }
    let normal_mean = sum / nf;
    let normal_std = (sum_sq / nf - normal_mean * normal_mean).sqrt();
    let normal_ok = normal_mean.abs() < 3.0 * 3.0 / nf.sqrt()
        && (normal_std - 3.0).abs() < 3.0 * 3.0 / (2.0 * nf).sqrt();

    // poisson(1.8): mean within 3 standard errors
    let mut sum = 0u64;
    for _ in 0..n {
        sum += rng.sample_poisson(1.8).unwrap();
    }
    let poisson_mean = sum as f64 / nf;
    let poisson_ok = (poisson_mean - 1.8).abs() < 3.0 * (1.8 / nf).sqrt();

    // discrete lognormal(32,18): realized mean within +/- 1 degree
    let mut sum = 0u64;
    for _ in 0..n {
        sum += rng.sample_discrete_lognormal(32.0, 18.0).unwrap();
    }
    let dln_mean = sum as f64 / nf;
    let dln_ok = (dln_mean - 32.0).abs() < 1.0;

    let pass = uniform_ok && exp_ok && normal_ok && poisson_ok && dln_ok;
    println!(
        "[criterion 8] sampler moments over 1e6 draws: uniform mean {uniform_mean:.5}, exp mean {exp_mean:.3}, normal std {normal_std:.4}, poisson mean {poisson_mean:.4}, DLN mean {dln_mean:.2} {}",
        verdict(pass)
    );
    assert!(uniform_ok, "uniform mean {uniform_mean}");
    assert!(exp_ok, "exponential mean {exp_mean}");
    assert!(normal_ok, "normal mean {normal_mean} / std {normal_std}");
    assert!(poisson_ok, "poisson mean {poisson_mean}");
    assert!(dln_ok, "DLN mean {dln_mean}");
}

#[test]
fn criterion_9_generate_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &std::path::Path, format: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_sscm"))
            .args([
                "generate",
                "--seed",
                "7",
                "--ensemble-size",
                "50",
                "--format",
                format,
                "--out",
            ])
            .arg(dir)
            .status()
            .expect("binary runs");
        assert!(status.success(), "generate exited with {status}");
    };
    let mut pass = true;
    for format in ["structured", "tabular"] {
        let dir_a = tmp.path().join(format!("{format}_a"));
        let dir_b = tmp.path().join(format!("{format}_b"));
        run(&dir_a, format);
        run(&dir_b, format);
        for name in [
            "config.json",
            if format == "tabular" { "taps.csv" } else { "realizations.jsonl" },
        ] {
            let a = std::fs::read(dir_a.join(name)).unwrap();
            let b = std::fs::read(dir_b.join(name)).unwrap();
            let same = a == b;
            pass &= same;
            assert!(same, "{format}/{name} differs between identical runs");
        }
    }
    println!(
        "[criterion 9] identical seed and config give byte-identical generate outputs (both formats) {}",
        verdict(pass)
    );
}
