//! Command-line driver: generate channel ensembles, validate their secondary
//! statistics, export per-realization spectra, and echo effective configs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sscm::ensemble::{run_ensemble, ValidationReport};
use sscm::error::Error;
use sscm::io::{export_spectrum, generate_to_dir, write_config_echo, OutputFormat, RunConfig};
use sscm::spatial::LobeSide;
use sscm::FORMAT_VERSION;

#[derive(Parser)]
#[command(
    name = "sscm",
    version,
    about = "3-D statistical channel simulator for 28 GHz dense-urban NLOS links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an ensemble of channel realizations and write it to disk.
    Generate(CommonArgs),
    /// Generate an ensemble and report its secondary statistics against the
    /// validation bands.
    Validate(ValidateArgs),
    /// Write the joint power spectrum of one realization.
    ExportSpectrum(ExportArgs),
    /// Print the effective configuration after file and flag overrides.
    ShowConfig(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for the ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of channel realizations.
    #[arg(long)]
    ensemble_size: Option<usize>,
    /// Output directory.
    #[arg(long, env = "SSCM_OUT_DIR")]
    out: Option<PathBuf>,
    /// Output encoding: `tabular` (CSV) or `structured` (JSON/JSONL).
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Exclude subpaths below the noise floor from statistics.
    #[arg(long)]
    validation_mode: Option<bool>,
    /// Model parameter override, repeatable: `--param temporal.n_max=4`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Exit nonzero when a validation band or invariant is violated.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Realization id within the configured ensemble.
    #[arg(long)]
    realization: u64,
    /// Which side's spectrum to write: `aod` or `aoa`.
    #[arg(long)]
    side: Side,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Side {
    Aod,
    Aoa,
}

impl From<Side> for LobeSide {
    fn from(side: Side) -> Self {
        match side {
            Side::Aod => LobeSide::Aod,
            Side::Aoa => LobeSide::Aoa,
        }
    }
}

impl CommonArgs {
    /// Model defaults, then config file, then flags, then `--param` pairs.
    fn effective_config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(size) = self.ensemble_size {
            cfg.ensemble_size = size;
        }
        if let Some(format) = self.format {
            cfg.format = format;
        }
        if let Some(mode) = self.validation_mode {
            cfg.validation_mode = mode;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        for pair in &self.params {
            let (name, value) = pair.split_once('=').ok_or_else(|| Error::InvalidConfig {
                field: pair.clone(),
                constraint: "expected NAME=VALUE".to_string(),
            })?;
            cfg.params.apply_override(name.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn required_out_dir(&self, cfg: &RunConfig) -> Result<PathBuf, Error> {
        cfg.out_dir.clone().ok_or_else(|| Error::InvalidConfig {
            field: "out".to_string(),
            constraint: "output directory required (--out or SSCM_OUT_DIR)".to_string(),
        })
    }
}

fn print_report(report: &ValidationReport) {
    println!(
        "ensemble: {} realizations, seed {}, validation_mode={}",
        report.ensemble_size, report.seed, report.validation_mode
    );
    println!(
        "rms delay spread [ns]: median {:.2}, mean {:.2}, p10 {:.2}, p90 {:.2} ({} samples)",
        report.rms_delay_spread_ns.median,
        report.rms_delay_spread_ns.mean,
        report.rms_delay_spread_ns.p10,
        report.rms_delay_spread_ns.p90,
        report.rms_delay_spread_ns.count,
    );
    println!(
        "rms lobe spread [deg]: azimuth mean {:.2}, elevation mean {:.2} ({} lobes)",
        report.rms_lobe_azimuth_spread_deg.mean,
        report.rms_lobe_elevation_spread_deg.mean,
        report.rms_lobe_azimuth_spread_deg.count,
    );
    println!(
        "fitted decay: cluster {:.1} ns (intercept {:.3}), subpath {:.1} ns (intercept {:.3})",
        report.fitted_cluster_decay_ns,
        report.fitted_cluster_p0,
        report.fitted_subpath_decay_ns,
        report.fitted_subpath_pi0,
    );
    println!("cluster count histogram: {:?}", report.cluster_count_histogram);
    println!("aod lobe histogram: {:?}", report.aod_lobe_count_histogram);
    println!("aoa lobe histogram: {:?}", report.aoa_lobe_count_histogram);
    if report.skipped_empty > 0 {
        println!(
            "skipped {} realizations with every subpath below the noise floor",
            report.skipped_empty
        );
    }
    println!(
        "invariants: structure {}, power {}, round-trip {}",
        report.invariants.structure_failures,
        report.invariants.power_conservation_failures,
        report.invariants.round_trip_failures,
    );
    for example in &report.invariants.examples {
        println!("  violation: {example}");
    }
    for check in &report.checks {
        println!(
            "check {:<36} {:>10.3} in [{}, {}] {}",
            check.name,
            check.value,
            check.lo,
            check.hi,
            if check.pass { "PASS" } else { "FAIL" }
        );
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = common.effective_config()?;
            let dir = common.required_out_dir(&cfg)?;
            let out = generate_to_dir(&cfg, &dir)?;
            println!(
                "wrote {} realizations to {} (config echo: {})",
                out.realization_count,
                out.data_path.display(),
                out.config_path.display()
            );
            Ok(0)
        }
        Command::Validate(args) => {
            let cfg = args.common.effective_config()?;
            let outcome = run_ensemble(&cfg.params, cfg.seed, cfg.ensemble_size, cfg.validation_mode)?;
            let report = ValidationReport::build(
                &outcome,
                &cfg.params,
                cfg.seed,
                cfg.ensemble_size,
                cfg.validation_mode,
            );
            print_report(&report);
            if let Some(dir) = &cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                write_config_echo(dir, &cfg)?;
                let path = dir.join("stats.json");
                let text = serde_json::to_string_pretty(&report)?;
                std::fs::write(&path, text + "\n")?;
                println!("report written to {}", path.display());
            }
            if args.strict && !report.all_pass() {
                eprintln!("validation bands violated (strict mode)");
                return Ok(2);
            }
            Ok(0)
        }
        Command::ExportSpectrum(args) => {
            let cfg = args.common.effective_config()?;
            let dir = args.common.required_out_dir(&cfg)?;
            let path = export_spectrum(&cfg, args.realization, args.side.into(), &dir)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::ShowConfig(common) => {
            let cfg = common.effective_config()?;
            let echo = serde_json::json!({
                "format_version": FORMAT_VERSION,
                "tool_version": env!("CARGO_PKG_VERSION"),
            });
            let mut tree = serde_json::to_value(&cfg)?;
            if let (Some(obj), Some(extra)) = (tree.as_object_mut(), echo.as_object()) {
                for (k, v) in extra {
                    obj.insert(k.clone(), v.clone());
                }
            }
            println!("{}", serde_json::to_string_pretty(&tree)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
