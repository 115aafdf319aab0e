//! CLI behavior: verbs, flag precedence, and exit codes (0 success,
//! 1 config error, 2 band violation under --strict, 3 I/O error).

use std::process::{Command, Output};

fn sscm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sscm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn show_config_prints_effective_config() {
    let out = sscm(&["show-config", "--seed", "5", "--param", "temporal.n_max=3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["seed"], 5);
    assert_eq!(parsed["params"]["temporal"]["n_max"], 3);
    assert_eq!(parsed["format_version"], sscm::FORMAT_VERSION);
    // defaults fill everything not overridden
    assert_eq!(parsed["params"]["link"]["ple"], 3.4);
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 11, "ensemble_size": 4, "params": {"temporal": {"n_max": 2}}}"#,
    )
    .unwrap();
    // flag overrides the file seed; file overrides the default n_max
    let out = sscm(&[
        "show-config",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["seed"], 99);
    assert_eq!(parsed["ensemble_size"], 4);
    assert_eq!(parsed["params"]["temporal"]["n_max"], 2);
}

#[test]
fn invalid_param_exits_with_config_error() {
    let out = sscm(&["show-config", "--param", "temporal.nonsense=1"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("temporal.nonsense"), "{}", stderr(&out));

    let out = sscm(&["show-config", "--param", "temporal.mu_tau_ns=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("mu_tau_ns"), "{}", stderr(&out));

    let out = sscm(&["generate", "--ensemble-size", "0", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ensemble_size"), "{}", stderr(&out));
}

#[test]
fn generate_without_output_dir_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_sscm"))
        .args(["generate", "--ensemble-size", "1"])
        .env_remove("SSCM_OUT_DIR")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--out"), "{}", stderr(&out));
}

#[test]
fn generate_honors_output_dir_env_var() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sscm"))
        .args(["generate", "--seed", "3", "--ensemble-size", "2"])
        .env("SSCM_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(tmp.path().join("realizations.jsonl").exists());
    assert!(tmp.path().join("config.json").exists());
}

#[test]
fn unwritable_output_dir_exits_with_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    // a path below a regular file cannot be created
    let target = blocker.join("sub");
    let out = sscm(&[
        "generate",
        "--ensemble-size",
        "1",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn validate_writes_report_and_strict_flags_violations() {
    let tmp = tempfile::tempdir().unwrap();
    // a small healthy run passes per-realization invariants and exits 0
    // without --strict regardless of band noise
    let out = sscm(&[
        "validate",
        "--seed",
        "2",
        "--ensemble-size",
        "150",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(report["ensemble_size"], 150);
    assert_eq!(report["invariants"]["structure_failures"], 0);
    assert!(stdout(&out).contains("rms delay spread"));

    // forcing a wrong decay constant drives the fitted value out of band
    let out = sscm(&[
        "validate",
        "--seed",
        "2",
        "--ensemble-size",
        "150",
        "--strict",
        "--param",
        "temporal.cluster_decay_ns=5",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn validation_mode_flag_controls_pruning() {
    let out = sscm(&[
        "validate",
        "--seed",
        "8",
        "--ensemble-size",
        "30",
        "--validation-mode",
        "false",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("validation_mode=false"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn export_spectrum_formats_and_unknown_id() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sscm(&[
        "export-spectrum",
        "--seed",
        "4",
        "--ensemble-size",
        "10",
        "--realization",
        "3",
        "--side",
        "aoa",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let record: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("spectrum_3_aoa.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(record["format_version"], sscm::FORMAT_VERSION);
    assert!(!record["cells"].as_array().unwrap().is_empty());

    let out = sscm(&[
        "export-spectrum",
        "--seed",
        "4",
        "--ensemble-size",
        "10",
        "--realization",
        "3",
        "--side",
        "aod",
        "--format",
        "tabular",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("spectrum_3_aod.csv")).unwrap();
    assert!(csv.starts_with("azimuth_deg,elevation_deg,power_mw\n"));
    assert!(csv.lines().count() > 1);

    let out = sscm(&[
        "export-spectrum",
        "--seed",
        "4",
        "--ensemble-size",
        "10",
        "--realization",
        "10",
        "--side",
        "aoa",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("unknown realization"), "{}", stderr(&out));
}

#[test]
fn tabular_generate_has_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sscm(&[
        "generate",
        "--seed",
        "6",
        "--ensemble-size",
        "3",
        "--format",
        "tabular",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("taps.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "realization,n,m,t_ns,power_mw,phase_rad,aod_az,aod_el,aoa_az,aoa_el,l1,l2"
    );
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 12);
    assert!(first.starts_with("0,1,1,"), "first tap row: {first}");
}
