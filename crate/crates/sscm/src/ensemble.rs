//! Ensemble orchestration: parallel generation over per-realization
//! sub-streams, secondary-statistics collection, per-realization invariant
//! checks, and the validation bands the simulated ensemble must hit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::analysis::{
    fit_exponential_decay_linear, mean, median, partition_clusters, percentile,
    rms_delay_spread, synthesize_pdp, synthesize_pdp_with_floor, threshold_lobes, EnsembleStats,
};
use crate::error::Result;
use crate::generator::generate_indexed;
use crate::params::ModelParams;
use crate::spatial::{assemble_spectrum, ChannelRealization, LobeSide};
use crate::FORMAT_VERSION;

/// Lobe extraction threshold relative to the spectrum peak, dB.
pub const LOBE_THRESHOLD_DB: f64 = -10.0;

/// Validation bands for ensemble statistics at the default parameter set.
pub mod bands {
    /// Median omnidirectional RMS delay spread, ns.
    pub const MEDIAN_RMS_DELAY_SPREAD_NS: (f64, f64) = (27.0, 37.0);
    /// Mean AOA RMS lobe azimuth spread, degrees.
    pub const MEAN_LOBE_AZ_SPREAD_DEG: (f64, f64) = (5.5, 8.5);
    /// Mean AOA RMS lobe elevation spread, degrees.
    pub const MEAN_LOBE_EL_SPREAD_DEG: (f64, f64) = (5.5, 8.5);
    /// Recovered cluster decay time, ns (30% around 49.4).
    pub const CLUSTER_DECAY_NS: (f64, f64) = (34.6, 64.2);
    /// Recovered subpath decay time, ns (30% around 16.9).
    pub const SUBPATH_DECAY_NS: (f64, f64) = (11.8, 22.0);
    /// Recovered first-cluster normalized power intercept (0.883 +/- 0.15).
    pub const CLUSTER_P0: (f64, f64) = (0.733, 1.033);
    /// Recovered first-subpath normalized power intercept (0.342 +/- 0.10).
    pub const SUBPATH_PI0: (f64, f64) = (0.242, 0.442);
}

/// Structural bounds every generated realization must satisfy.
pub fn check_structure(real: &ChannelRealization, params: &ModelParams) -> std::result::Result<(), String> {
    let n = real.clusters.len() as u32;
    if n < 1 || n > params.temporal.n_max {
        return Err(format!("cluster count {n} outside [1, {}]", params.temporal.n_max));
    }
    let l_cap = params.spatial.l_max.min(n);
    for (side, l) in [
        ("aod", real.aod_lobes.len() as u32),
        ("aoa", real.aoa_lobes.len() as u32),
    ] {
        if l < 1 || l > l_cap {
            return Err(format!("{side} lobe count {l} outside [1, {l_cap}]"));
        }
    }
    let dt = params.temporal.min_subpath_interval_ns();
    for c in &real.clusters {
        let m = c.subpaths.len() as u32;
        if m < 1 || m > params.temporal.m_max {
            return Err(format!(
                "cluster {}: subpath count {m} outside [1, {}]",
                c.index, params.temporal.m_max
            ));
        }
        if c.subpaths[0].intra_delay_ns != 0.0 {
            return Err(format!("cluster {}: first subpath not at zero delay", c.index));
        }
        // delays must follow (dt*(m-1))^(1+x) for a single x in [0, x_max];
        // recover x from the first subpath whose base is not 1 (where the
        // exponent is unobservable)
        let recovered_x = c.subpaths.iter().skip(1).find_map(|sp| {
            let base = dt * (sp.subpath_index - 1) as f64;
            (base.ln() != 0.0).then(|| sp.intra_delay_ns.ln() / base.ln() - 1.0)
        });
        if let Some(x) = recovered_x {
            if !(-1e-9..=params.temporal.x_max + 1e-9).contains(&x) {
                return Err(format!(
                    "cluster {}: implied delay exponent {x} outside [0, {}]",
                    c.index, params.temporal.x_max
                ));
            }
            for sp in &c.subpaths {
                let expect = (dt * (sp.subpath_index - 1) as f64).powf(1.0 + x);
                if (sp.intra_delay_ns - expect).abs() > 1e-6 * expect.max(1.0) {
                    return Err(format!(
                        "cluster {}: subpath {} delay {} deviates from spacing law",
                        c.index, sp.subpath_index, sp.intra_delay_ns
                    ));
                }
            }
        }
    }
    for w in real.clusters.windows(2) {
        let gap = w[1].excess_delay_ns - (w[0].excess_delay_ns + w[0].last_intra_delay_ns());
        if gap < params.temporal.inter_cluster_void_ns - 1e-12 {
            return Err(format!(
                "inter-cluster gap {gap} below {} ns",
                params.temporal.inter_cluster_void_ns
            ));
        }
    }
    Ok(())
}

/// Power conservation: subpath sum and each side's lobe sum equal the
/// omnidirectional received power to 1e-9 relative.
pub fn check_power_conservation(real: &ChannelRealization) -> std::result::Result<(), String> {
    let pr = real.link.omni_rx_power_mw();
    let tol = 1e-9 * pr;
    let temporal = real.total_subpath_power_mw();
    if (temporal - pr).abs() > tol {
        return Err(format!("subpath power sum {temporal} != received power {pr}"));
    }
    for side in [LobeSide::Aod, LobeSide::Aoa] {
        let lobes = real.lobe_power_sum_mw(side);
        if (lobes - pr).abs() > tol {
            return Err(format!("{side} lobe power sum {lobes} != received power {pr}"));
        }
    }
    Ok(())
}

/// Round trip: partitioning the synthesized PDP with the generation void
/// interval recovers exactly the generated clusters and powers.
pub fn check_round_trip(real: &ChannelRealization, params: &ModelParams) -> std::result::Result<(), String> {
    let pdp = synthesize_pdp(real);
    let found = partition_clusters(&pdp, params.temporal.inter_cluster_void_ns);
    if found.len() != real.clusters.len() {
        return Err(format!(
            "partition found {} clusters, generated {}",
            found.len(),
            real.clusters.len()
        ));
    }
    for (f, g) in found.iter().zip(&real.clusters) {
        if (f.power_mw - g.power_mw).abs() > 1e-9 * g.power_mw {
            return Err(format!(
                "cluster {} power {} != generated {}",
                g.index, f.power_mw, g.power_mw
            ));
        }
    }
    Ok(())
}

/// Invariant violation counters over an ensemble, with first examples.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InvariantCounts {
    pub structure_failures: usize,
    pub power_conservation_failures: usize,
    pub round_trip_failures: usize,
    /// First few violation messages, for diagnostics.
    pub examples: Vec<String>,
}

impl InvariantCounts {
    pub fn all_clean(&self) -> bool {
        self.structure_failures == 0
            && self.power_conservation_failures == 0
            && self.round_trip_failures == 0
    }
}

struct RealizationSummary {
    rms_ds_ns: Option<f64>,
    lobe_spreads: Vec<(f64, f64)>,
    n_clusters: u32,
    l_aod: u32,
    l_aoa: u32,
    cluster_points: Vec<(f64, f64)>,
    subpath_points: Vec<(f64, f64)>,
    structure_err: Option<String>,
    power_err: Option<String>,
    round_trip_err: Option<String>,
    empty: bool,
}

fn summarize(real: &ChannelRealization, params: &ModelParams, validation_mode: bool) -> RealizationSummary {
    let structure_err = check_structure(real, params).err();
    let power_err = check_power_conservation(real).err();
    let round_trip_err = check_round_trip(real, params).err();

    let floor_mw = params.temporal.min_subpath_power_mw();
    let pdp = if validation_mode {
        synthesize_pdp_with_floor(real, floor_mw)
    } else {
        synthesize_pdp(real)
    };
    let empty = pdp.taps.is_empty();
    let rms_ds_ns = rms_delay_spread(&pdp).ok();

    // one spread sample per extracted AOA lobe
    let mut lobe_spreads = Vec::new();
    if !empty {
        let spectrum = assemble_spectrum(real, LobeSide::Aoa);
        if let Ok(regions) = threshold_lobes(&spectrum, LOBE_THRESHOLD_DB) {
            lobe_spreads.extend(regions.iter().map(crate::analysis::rms_lobe_angular_spread));
        }
    }

    // pooled decay-fit points: cluster powers normalized to received power,
    // subpath powers normalized to their cluster power
    let pr = real.link.omni_rx_power_mw();
    let mut cluster_points = Vec::with_capacity(real.clusters.len());
    let mut subpath_points = Vec::new();
    for c in &real.clusters {
        cluster_points.push((c.excess_delay_ns, c.power_mw / pr));
        for sp in &c.subpaths {
            if validation_mode && sp.below_floor {
                continue;
            }
            subpath_points.push((sp.intra_delay_ns, sp.power_mw / c.power_mw));
        }
    }

    RealizationSummary {
        rms_ds_ns: if empty { None } else { rms_ds_ns },
        lobe_spreads,
        n_clusters: real.clusters.len() as u32,
        l_aod: real.aod_lobes.len() as u32,
        l_aoa: real.aoa_lobes.len() as u32,
        cluster_points,
        subpath_points,
        structure_err,
        power_err,
        round_trip_err,
        empty,
    }
}

/// Result of an ensemble run: secondary statistics plus invariant counters.
pub struct EnsembleOutcome {
    pub stats: EnsembleStats,
    pub invariants: InvariantCounts,
}

/// Generate and analyze `size` realizations in parallel. Realization `i`
/// always runs on sub-stream `i` of `seed`, so results are independent of
/// worker count and ordering.
pub fn run_ensemble(
    params: &ModelParams,
    seed: u64,
    size: usize,
    validation_mode: bool,
) -> Result<EnsembleOutcome> {
    let summaries: Vec<RealizationSummary> = (0..size as u64)
        .into_par_iter()
        .map(|i| {
            let real = generate_indexed(params, seed, i)?;
            Ok(summarize(&real, params, validation_mode))
        })
        .collect::<Result<_>>()?;

    let mut stats = EnsembleStats::default();
    let mut invariants = InvariantCounts::default();
    let mut cluster_points = Vec::new();
    let mut subpath_points = Vec::new();
    for (i, s) in summaries.iter().enumerate() {
        if let Some(ds) = s.rms_ds_ns {
            stats.rms_delay_spreads_ns.push(ds);
        }
        if s.empty {
            stats.skipped_empty += 1;
        }
        for &(az, el) in &s.lobe_spreads {
            stats.rms_lobe_az_spreads_deg.push(az);
            stats.rms_lobe_el_spreads_deg.push(el);
        }
        stats.cluster_counts.push(s.n_clusters);
        stats.lobe_counts_aod.push(s.l_aod);
        stats.lobe_counts_aoa.push(s.l_aoa);
        cluster_points.extend_from_slice(&s.cluster_points);
        subpath_points.extend_from_slice(&s.subpath_points);

        for (err, count) in [
            (&s.structure_err, &mut invariants.structure_failures),
            (&s.power_err, &mut invariants.power_conservation_failures),
            (&s.round_trip_err, &mut invariants.round_trip_failures),
        ] {
            if let Some(msg) = err {
                *count += 1;
                if invariants.examples.len() < 5 {
                    invariants.examples.push(format!("realization {i}: {msg}"));
                }
            }
        }
    }

    if let Ok((p0, decay)) = fit_exponential_decay_linear(&cluster_points) {
        stats.fitted_p0 = p0;
        stats.fitted_big_gamma_ns = decay;
    }
    if let Ok((pi0, decay)) = fit_exponential_decay_linear(&subpath_points) {
        stats.fitted_pi0 = pi0;
        stats.fitted_gamma_ns = decay;
    }

    Ok(EnsembleOutcome { stats, invariants })
}

/// One named band check of the validation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandCheck {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl BandCheck {
    fn new(name: &str, value: f64, (lo, hi): (f64, f64)) -> Self {
        Self {
            name: name.to_string(),
            value,
            lo,
            hi,
            pass: value.is_finite() && value >= lo && value <= hi,
        }
    }
}

/// Distribution summary block of the validation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
}

fn spread_summary(values: &[f64]) -> SpreadSummary {
    SpreadSummary {
        count: values.len(),
        mean: mean(values),
        median: median(values),
        p10: percentile(values, 0.10),
        p90: percentile(values, 0.90),
    }
}

/// Structured validation report written by the `validate` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub format_version: u32,
    pub seed: u64,
    pub ensemble_size: usize,
    pub validation_mode: bool,
    pub rms_delay_spread_ns: SpreadSummary,
    pub rms_lobe_azimuth_spread_deg: SpreadSummary,
    pub rms_lobe_elevation_spread_deg: SpreadSummary,
    pub fitted_cluster_decay_ns: f64,
    pub fitted_cluster_p0: f64,
    pub fitted_subpath_decay_ns: f64,
    pub fitted_subpath_pi0: f64,
    pub cluster_count_histogram: BTreeMap<u32, usize>,
    pub aod_lobe_count_histogram: BTreeMap<u32, usize>,
    pub aoa_lobe_count_histogram: BTreeMap<u32, usize>,
    pub skipped_empty: usize,
    pub invariants: InvariantCounts,
    pub checks: Vec<BandCheck>,
    pub params: ModelParams,
}

impl ValidationReport {
    pub fn build(
        outcome: &EnsembleOutcome,
        params: &ModelParams,
        seed: u64,
        ensemble_size: usize,
        validation_mode: bool,
    ) -> Self {
        let stats = &outcome.stats;
        let checks = vec![
            BandCheck::new(
                "median_rms_delay_spread_ns",
                stats.median_rms_delay_spread_ns(),
                bands::MEDIAN_RMS_DELAY_SPREAD_NS,
            ),
            BandCheck::new(
                "mean_rms_lobe_azimuth_spread_deg",
                stats.mean_rms_lobe_az_spread_deg(),
                bands::MEAN_LOBE_AZ_SPREAD_DEG,
            ),
            BandCheck::new(
                "mean_rms_lobe_elevation_spread_deg",
                stats.mean_rms_lobe_el_spread_deg(),
                bands::MEAN_LOBE_EL_SPREAD_DEG,
            ),
            BandCheck::new(
                "fitted_cluster_decay_ns",
                stats.fitted_big_gamma_ns,
                bands::CLUSTER_DECAY_NS,
            ),
            BandCheck::new(
                "fitted_subpath_decay_ns",
                stats.fitted_gamma_ns,
                bands::SUBPATH_DECAY_NS,
            ),
            BandCheck::new("fitted_cluster_p0", stats.fitted_p0, bands::CLUSTER_P0),
            BandCheck::new("fitted_subpath_pi0", stats.fitted_pi0, bands::SUBPATH_PI0),
        ];

        let histogram = |counts: &[u32]| {
            let mut h = BTreeMap::new();
            for &c in counts {
                *h.entry(c).or_insert(0usize) += 1;
            }
            h
        };

        Self {
            format_version: FORMAT_VERSION,
            seed,
            ensemble_size,
            validation_mode,
            rms_delay_spread_ns: spread_summary(&stats.rms_delay_spreads_ns),
            rms_lobe_azimuth_spread_deg: spread_summary(&stats.rms_lobe_az_spreads_deg),
            rms_lobe_elevation_spread_deg: spread_summary(&stats.rms_lobe_el_spreads_deg),
            fitted_cluster_decay_ns: stats.fitted_big_gamma_ns,
            fitted_cluster_p0: stats.fitted_p0,
            fitted_subpath_decay_ns: stats.fitted_gamma_ns,
            fitted_subpath_pi0: stats.fitted_pi0,
            cluster_count_histogram: histogram(&stats.cluster_counts),
            aod_lobe_count_histogram: histogram(&stats.lobe_counts_aod),
            aoa_lobe_count_histogram: histogram(&stats.lobe_counts_aoa),
            skipped_empty: stats.skipped_empty,
            invariants: outcome.invariants.clone(),
            checks,
            params: params.clone(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.invariants.all_clean()
    }
}
