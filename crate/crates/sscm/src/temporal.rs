//! Temporal skeleton of a channel realization: time clusters, intra-cluster
//! subpaths, their delays, powers, phases, and absolute propagation times.
//!
//! Clusters are kept disjoint in time by a minimum inter-cluster void
//! interval (25 ns at the model defaults), which is also what makes the
//! analysis-side partitioning recover generated clusters exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::dbm_to_mw;
use crate::rng::RngStream;

/// Constants of the temporal generator. Defaults are the 28 GHz dense-urban
/// NLOS fit over an 800 MHz RF null-to-null bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalParams {
    /// Maximum number of time clusters.
    pub n_max: u32,
    /// Maximum number of subpaths per cluster.
    pub m_max: u32,
    /// Mean of the exponential inter-cluster delay draw, ns.
    pub mu_tau_ns: f64,
    /// Minimum void interval separating consecutive clusters, ns.
    pub inter_cluster_void_ns: f64,
    /// Cluster power decay time, ns.
    pub cluster_decay_ns: f64,
    /// Mean normalized power of the first-arriving cluster.
    pub cluster_p0: f64,
    /// Subpath power decay time, ns.
    pub subpath_decay_ns: f64,
    /// Mean normalized power of the first intra-cluster subpath.
    pub subpath_p0: f64,
    /// Per-cluster lognormal shadowing sigma, dB.
    pub cluster_shadow_sigma_db: f64,
    /// Per-subpath lognormal shadowing sigma, dB.
    pub subpath_shadow_sigma_db: f64,
    /// Baseband bandwidth, Hz; its inverse sets the minimum subpath spacing.
    pub bb_bandwidth_hz: f64,
    /// Upper bound of the per-cluster delay-stretch exponent draw.
    pub x_max: f64,
    /// Carrier frequency, Hz; drives intra-cluster phase progression.
    pub carrier_hz: f64,
    /// Validation noise floor; weaker subpaths are flagged, not dropped.
    pub min_subpath_power_dbm: f64,
}

impl Default for TemporalParams {
    fn default() -> Self {
        Self {
            n_max: 6,
            m_max: 30,
            mu_tau_ns: 83.0,
            inter_cluster_void_ns: 25.0,
            cluster_decay_ns: 49.4,
            cluster_p0: 0.883,
            subpath_decay_ns: 16.9,
            subpath_p0: 0.342,
            cluster_shadow_sigma_db: 3.0,
            subpath_shadow_sigma_db: 6.0,
            bb_bandwidth_hz: 400e6,
            x_max: 0.43,
            carrier_hz: 28e9,
            min_subpath_power_dbm: -100.0,
        }
    }
}

impl TemporalParams {
    /// Minimum subpath time interval in ns (inverse baseband bandwidth).
    pub fn min_subpath_interval_ns(&self) -> f64 {
        1e9 / self.bb_bandwidth_hz
    }

    /// Validation noise floor in linear mW.
    pub fn min_subpath_power_mw(&self) -> f64 {
        dbm_to_mw(self.min_subpath_power_dbm)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, constraint: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("temporal.{field}"),
                    constraint: constraint.to_string(),
                })
            }
        };
        check(self.n_max >= 1, "n_max", ">= 1")?;
        check(self.m_max >= 1, "m_max", ">= 1")?;
        check(self.mu_tau_ns > 0.0, "mu_tau_ns", "> 0")?;
        check(self.inter_cluster_void_ns >= 0.0, "inter_cluster_void_ns", ">= 0")?;
        check(self.cluster_decay_ns > 0.0, "cluster_decay_ns", "> 0")?;
        check(
            self.cluster_p0 > 0.0 && self.cluster_p0 <= 1.0,
            "cluster_p0",
            "in (0, 1]",
        )?;
        check(self.subpath_decay_ns > 0.0, "subpath_decay_ns", "> 0")?;
        check(
            self.subpath_p0 > 0.0 && self.subpath_p0 <= 1.0,
            "subpath_p0",
            "in (0, 1]",
        )?;
        check(
            self.cluster_shadow_sigma_db >= 0.0,
            "cluster_shadow_sigma_db",
            ">= 0",
        )?;
        check(
            self.subpath_shadow_sigma_db >= 0.0,
            "subpath_shadow_sigma_db",
            ">= 0",
        )?;
        check(self.bb_bandwidth_hz > 0.0, "bb_bandwidth_hz", "> 0")?;
        check(self.x_max >= 0.0, "x_max", ">= 0")?;
        check(self.carrier_hz > 0.0, "carrier_hz", "> 0")?;
        check(
            self.min_subpath_power_dbm.is_finite(),
            "min_subpath_power_dbm",
            "finite",
        )?;
        Ok(())
    }
}

/// One multipath component inside a time cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subpath {
    /// 1-based index of the owning cluster.
    pub cluster_index: u32,
    /// 1-based index within the cluster.
    pub subpath_index: u32,
    /// Delay relative to the cluster start, ns.
    pub intra_delay_ns: f64,
    pub power_mw: f64,
    pub phase_rad: f64,
    /// Absolute propagation time, ns. Zero until anchored to a link delay.
    pub abs_time_ns: f64,
    /// True when the power sits below the validation noise floor.
    pub below_floor: bool,
}

/// A group of subpaths travelling closely in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCluster {
    /// 1-based cluster index in order of arrival.
    pub index: u32,
    /// Cluster excess delay relative to the first cluster, ns.
    pub excess_delay_ns: f64,
    pub power_mw: f64,
    pub subpaths: Vec<Subpath>,
}

impl TimeCluster {
    /// Intra-cluster delay of the last subpath, ns.
    pub fn last_intra_delay_ns(&self) -> f64 {
        self.subpaths.last().map_or(0.0, |sp| sp.intra_delay_ns)
    }
}

/// Cluster count and per-side spatial lobe counts.
///
/// Lobe counts are Poisson draws clamped to `[1, min(l_max, n_clusters)]`:
/// there cannot be more lobes than travelling time clusters.
pub fn draw_counts(
    params: &TemporalParams,
    mu_aod: f64,
    mu_aoa: f64,
    l_max: u32,
    rng: &mut RngStream,
) -> Result<(u32, u32, u32)> {
    let n = rng.sample_discrete_uniform(1, params.n_max as i64)? as u32;
    let a = rng.sample_poisson(mu_aod + 0.2)? as u32;
    let b = rng.sample_poisson(mu_aoa + 0.1)? as u32;
    let clamp = |raw: u32| raw.min(n).max(1).min(l_max);
    Ok((n, clamp(a), clamp(b)))
}

/// Number of subpaths in each of `n` clusters.
pub fn draw_subpath_counts(n: u32, params: &TemporalParams, rng: &mut RngStream) -> Result<Vec<u32>> {
    (0..n)
        .map(|_| Ok(rng.sample_discrete_uniform(1, params.m_max as i64)? as u32))
        .collect()
}

/// Intra-cluster subpath delays with the stretch exponent already fixed.
///
/// Delay of subpath `m` (1-based) is `(dt * (m-1))^(1+x)` with `dt` in ns,
/// which pins the first subpath at zero and makes consecutive gaps
/// nondecreasing for `x >= 0`.
pub fn subpath_delays_with_exponent(m_n: u32, dt_ns: f64, x: f64) -> Vec<f64> {
    (0..m_n)
        .map(|m| (dt_ns * m as f64).powf(1.0 + x))
        .collect()
}

/// Intra-cluster subpath delays; the stretch exponent is drawn once per
/// cluster so delays stay monotone in the subpath index.
pub fn subpath_delays(m_n: u32, params: &TemporalParams, rng: &mut RngStream) -> Result<Vec<f64>> {
    let x = rng.sample_uniform(0.0, params.x_max)?;
    Ok(subpath_delays_with_exponent(
        m_n,
        params.min_subpath_interval_ns(),
        x,
    ))
}

/// Cluster excess delays from pre-drawn inter-cluster gaps.
///
/// `sorted_gaps[0]` must be zero; cluster `n` starts one void interval plus
/// its gap after the previous cluster's last subpath.
pub fn cluster_delays_from_gaps(
    last_subpath_delays: &[f64],
    sorted_gaps: &[f64],
    void_ns: f64,
) -> Vec<f64> {
    let mut taus = Vec::with_capacity(sorted_gaps.len());
    for (i, gap) in sorted_gaps.iter().enumerate() {
        if i == 0 {
            taus.push(0.0);
        } else {
            let prev: f64 = taus[i - 1];
            taus.push(prev + last_subpath_delays[i - 1] + gap + void_ns);
        }
    }
    taus
}

/// Cluster excess delays: exponential draws sorted ascending and re-based so
/// the first gap is zero, then chained behind each cluster's last subpath
/// plus the void interval.
pub fn cluster_delays(
    n: u32,
    last_subpath_delays: &[f64],
    params: &TemporalParams,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    assert_eq!(last_subpath_delays.len(), n as usize);
    let mut raw: Vec<f64> = (0..n)
        .map(|_| rng.sample_exponential(params.mu_tau_ns))
        .collect::<Result<_>>()?;
    raw.sort_by(f64::total_cmp);
    let min = raw.first().copied().unwrap_or(0.0);
    let gaps: Vec<f64> = raw.iter().map(|v| v - min).collect();
    Ok(cluster_delays_from_gaps(
        last_subpath_delays,
        &gaps,
        params.inter_cluster_void_ns,
    ))
}

/// Cluster powers: exponential decay over excess delay with per-cluster
/// lognormal shadowing, normalized so the cluster sum equals the
/// omnidirectional received power.
pub fn cluster_powers(
    taus: &[f64],
    total_power_mw: f64,
    params: &TemporalParams,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let raw: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let shadow_db = rng.sample_normal(0.0, params.cluster_shadow_sigma_db)?;
            Ok(params.cluster_p0
                * (-tau / params.cluster_decay_ns).exp()
                * 10f64.powf(shadow_db / 10.0))
        })
        .collect::<Result<_>>()?;
    let sum: f64 = raw.iter().sum();
    Ok(raw.iter().map(|p| p / sum * total_power_mw).collect())
}

/// Subpath powers: exponential decay over intra-cluster delay with
/// per-subpath lognormal shadowing, normalized to the cluster power.
pub fn subpath_powers(
    rhos: &[f64],
    cluster_power_mw: f64,
    params: &TemporalParams,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let raw: Vec<f64> = rhos
        .iter()
        .map(|&rho| {
            let shadow_db = rng.sample_normal(0.0, params.subpath_shadow_sigma_db)?;
            Ok(params.subpath_p0
                * (-rho / params.subpath_decay_ns).exp()
                * 10f64.powf(shadow_db / 10.0))
        })
        .collect::<Result<_>>()?;
    let sum: f64 = raw.iter().sum();
    Ok(raw.iter().map(|p| p / sum * cluster_power_mw).collect())
}

/// Subpath phases: a uniform anchor for the first subpath, then linear
/// carrier-frequency progression over intra-cluster delay, reduced mod 2pi.
pub fn subpath_phases(rhos: &[f64], params: &TemporalParams, rng: &mut RngStream) -> Result<Vec<f64>> {
    let two_pi = std::f64::consts::TAU;
    let anchor = rng.sample_uniform(0.0, two_pi)?;
    Ok(rhos
        .iter()
        .map(|&rho_ns| (anchor + two_pi * params.carrier_hz * rho_ns * 1e-9).rem_euclid(two_pi))
        .collect())
}

/// Anchor every subpath to absolute propagation time: free-space delay plus
/// cluster excess delay plus intra-cluster delay.
pub fn absolute_times(clusters: &mut [TimeCluster], t0_ns: f64) {
    for cluster in clusters.iter_mut() {
        for sp in cluster.subpaths.iter_mut() {
            sp.abs_time_ns = t0_ns + cluster.excess_delay_ns + sp.intra_delay_ns;
        }
    }
}

/// Generate the full temporal skeleton for one realization: subpath counts,
/// delays, cluster delays, cluster and subpath powers, phases, and absolute
/// times.
pub fn generate_clusters(
    n: u32,
    total_power_mw: f64,
    t0_ns: f64,
    params: &TemporalParams,
    rng: &mut RngStream,
) -> Result<Vec<TimeCluster>> {
    let counts = draw_subpath_counts(n, params, rng)?;
    let delays: Vec<Vec<f64>> = counts
        .iter()
        .map(|&m_n| subpath_delays(m_n, params, rng))
        .collect::<Result<_>>()?;
    let last_delays: Vec<f64> = delays.iter().map(|d| *d.last().unwrap()).collect();
    let taus = cluster_delays(n, &last_delays, params, rng)?;
    let powers = cluster_powers(&taus, total_power_mw, params, rng)?;

    let floor_mw = params.min_subpath_power_mw();
    let mut clusters = Vec::with_capacity(n as usize);
    for (idx, ((rhos, &tau), &p_n)) in delays.iter().zip(&taus).zip(&powers).enumerate() {
        let sp_powers = subpath_powers(rhos, p_n, params, rng)?;
        let phases = subpath_phases(rhos, params, rng)?;
        let subpaths = rhos
            .iter()
            .zip(&sp_powers)
            .zip(&phases)
            .enumerate()
            .map(|(m, ((&rho, &power), &phase))| Subpath {
                cluster_index: idx as u32 + 1,
                subpath_index: m as u32 + 1,
                intra_delay_ns: rho,
                power_mw: power,
                phase_rad: phase,
                abs_time_ns: 0.0,
                below_floor: power < floor_mw,
            })
            .collect();
        clusters.push(TimeCluster {
            index: idx as u32 + 1,
            excess_delay_ns: tau,
            power_mw: p_n,
            subpaths,
        });
    }
    absolute_times(&mut clusters, t0_ns);
    Ok(clusters)
}
