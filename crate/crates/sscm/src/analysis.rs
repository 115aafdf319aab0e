//! Measurement-side algorithms applied to simulated outputs: omnidirectional
//! PDP synthesis, void-interval cluster partitioning, relative-threshold lobe
//! extraction, RMS delay and angular spreads, and exponential decay fitting.
//!
//! These are the independent analysis routines the generator is validated
//! against; they never peek at generation internals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{ChannelRealization, PowerSpectrum, SPECTRUM_AZ_CELLS, SPECTRUM_EL_CELLS};

/// Whether PDP tap times are absolute propagation times or excess delays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdpOrigin {
    Absolute,
    Excess,
}

/// Received power over propagation delay; times strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    pub taps: Vec<(f64, f64)>,
    pub origin: PdpOrigin,
}

impl PowerDelayProfile {
    pub fn total_power_mw(&self) -> f64 {
        self.taps.iter().map(|&(_, p)| p).sum()
    }
}

/// Flatten a realization into its omnidirectional PDP: time-sorted subpath
/// taps with coincident times merged by power addition.
pub fn synthesize_pdp(realization: &ChannelRealization) -> PowerDelayProfile {
    let taps = realization
        .clusters
        .iter()
        .flat_map(|c| c.subpaths.iter().map(|sp| (sp.abs_time_ns, sp.power_mw)));
    pdp_from_taps(taps)
}

/// Same as [`synthesize_pdp`] but with subpaths below `floor_mw` excluded,
/// emulating a receiver noise floor.
pub fn synthesize_pdp_with_floor(
    realization: &ChannelRealization,
    floor_mw: f64,
) -> PowerDelayProfile {
    let taps = realization.clusters.iter().flat_map(|c| {
        c.subpaths
            .iter()
            .filter(move |sp| sp.power_mw >= floor_mw)
            .map(|sp| (sp.abs_time_ns, sp.power_mw))
    });
    pdp_from_taps(taps)
}

fn pdp_from_taps(taps: impl Iterator<Item = (f64, f64)>) -> PowerDelayProfile {
    let mut taps: Vec<(f64, f64)> = taps.collect();
    taps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(taps.len());
    for (t, p) in taps {
        match merged.last_mut() {
            Some(last) if last.0 == t => last.1 += p,
            _ => merged.push((t, p)),
        }
    }
    PowerDelayProfile {
        taps: merged,
        origin: PdpOrigin::Absolute,
    }
}

/// Power-weighted RMS width of the PDP about its mean excess delay.
/// Invariant under global time shifts and uniform power scaling.
pub fn rms_delay_spread(pdp: &PowerDelayProfile) -> Result<f64> {
    let first = pdp.taps.first().ok_or(Error::EmptyPdp)?.0;
    let total: f64 = pdp.taps.iter().map(|&(_, p)| p).sum();
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for &(t, p) in &pdp.taps {
        let excess = t - first;
        mean += p * excess;
        mean_sq += p * excess * excess;
    }
    mean /= total;
    mean_sq /= total;
    Ok((mean_sq - mean * mean).max(0.0).sqrt())
}

/// One partitioned time cluster: extent and summed power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedCluster {
    pub start_ns: f64,
    pub end_ns: f64,
    pub power_mw: f64,
    pub tap_count: usize,
}

/// Split a PDP into maximal tap runs separated by gaps of at least
/// `void_ns`: a gap >= the void interval starts a new cluster.
pub fn partition_clusters(pdp: &PowerDelayProfile, void_ns: f64) -> Vec<PartitionedCluster> {
    let mut clusters = Vec::new();
    let mut current: Option<PartitionedCluster> = None;
    for &(t, p) in &pdp.taps {
        match current.as_mut() {
            Some(c) if t - c.end_ns < void_ns => {
                c.end_ns = t;
                c.power_mw += p;
                c.tap_count += 1;
            }
            _ => {
                if let Some(done) = current.take() {
                    clusters.push(done);
                }
                current = Some(PartitionedCluster {
                    start_ns: t,
                    end_ns: t,
                    power_mw: p,
                    tap_count: 1,
                });
            }
        }
    }
    if let Some(done) = current {
        clusters.push(done);
    }
    clusters
}

/// Least-squares fit of `power = p0 * exp(-delay / decay)` in log space.
/// Returns `(p0, decay_ns)`.
pub fn fit_exponential_decay(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    for &(x, p) in points {
        if p <= 0.0 {
            return Err(Error::NonPositivePower(p));
        }
        sum_x += x;
        sum_y += p.ln();
    }
    let (x_bar, y_bar) = (sum_x / n, sum_y / n);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, p) in points {
        let dx = x - x_bar;
        sxx += dx * dx;
        sxy += dx * (p.ln() - y_bar);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    Ok((intercept.exp(), -1.0 / slope))
}

/// Least-squares fit of `power = p0 * exp(-delay / decay)` on the linear
/// power scale, the way a regression curve is fitted through a scatter of
/// normalized powers. Returns `(p0, decay_ns)`.
///
/// For a fixed decay rate the optimal amplitude is closed-form, leaving a
/// one-dimensional golden-section search over the rate.
pub fn fit_exponential_decay_linear(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let first_x = points[0].0;
    let mut distinct = false;
    for &(x, p) in points {
        if p <= 0.0 {
            return Err(Error::NonPositivePower(p));
        }
        distinct |= x != first_x;
    }
    if !distinct {
        return Err(Error::DegenerateFit);
    }

    // residual SSE at rate r, up to the constant sum of p^2:
    // -(sum p e^{-rt})^2 / sum e^{-2rt}
    let amplitude_and_score = |r: f64| -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(t, p) in points {
            let e = (-r * t).exp();
            num += p * e;
            den += e * e;
        }
        (num / den, -(num * num) / den)
    };

    // the score is not unimodal in general (points at t = 0 flatten it at
    // large rates), so scan a log-spaced rate grid first, then refine
    let (rate_min, rate_max) = (1e-4f64, 10.0f64);
    let grid = 256;
    let rate_at = |i: usize| {
        rate_min * (rate_max / rate_min).powf(i as f64 / (grid - 1) as f64)
    };
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for i in 0..grid {
        let score = amplitude_and_score(rate_at(i)).1;
        if score < best_score {
            best_score = score;
            best = i;
        }
    }
    let (mut lo, mut hi) = (rate_at(best.saturating_sub(1)), rate_at((best + 1).min(grid - 1)));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if amplitude_and_score(m1).1 < amplitude_and_score(m2).1 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let rate = 0.5 * (lo + hi);
    Ok((amplitude_and_score(rate).0, 1.0 / rate))
}

/// One cell of a thresholded lobe region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCell {
    pub azimuth_deg: u16,
    pub elevation_deg: i16,
    pub power_mw: f64,
}

/// A connected above-threshold region of the power spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeRegion {
    pub cells: Vec<SpectrumCell>,
}

impl LobeRegion {
    pub fn power_mw(&self) -> f64 {
        self.cells.iter().map(|c| c.power_mw).sum()
    }
}

/// Extract spatial lobes: connected components (4-connectivity, azimuth
/// wrapping at 360 degrees) of cells within `threshold_db` of the spectrum
/// peak.
pub fn threshold_lobes(spectrum: &PowerSpectrum, threshold_db: f64) -> Result<Vec<LobeRegion>> {
    let peak = spectrum.peak_mw();
    if peak <= 0.0 {
        return Err(Error::EmptySpectrum);
    }
    let cutoff = peak * 10f64.powf(threshold_db / 10.0);

    let mut above = vec![false; SPECTRUM_AZ_CELLS * SPECTRUM_EL_CELLS];
    let flat = |az: usize, el: usize| az * SPECTRUM_EL_CELLS + el;
    for (az, el, p) in spectrum.nonzero_cells() {
        if p >= cutoff {
            above[flat(az as usize, (el + 90) as usize)] = true;
        }
    }

    let mut visited = vec![false; above.len()];
    let mut regions = Vec::new();
    let mut queue = Vec::new();
    for start in 0..above.len() {
        if !above[start] || visited[start] {
            continue;
        }
        let mut cells = Vec::new();
        visited[start] = true;
        queue.push(start);
        while let Some(i) = queue.pop() {
            let az = i / SPECTRUM_EL_CELLS;
            let el = i % SPECTRUM_EL_CELLS;
            cells.push(SpectrumCell {
                azimuth_deg: az as u16,
                elevation_deg: el as i16 - 90,
                power_mw: spectrum.get(az as u16, el as i16 - 90),
            });
            let mut push = |j: usize| {
                if above[j] && !visited[j] {
                    visited[j] = true;
                    queue.push(j);
                }
            };
            push(flat((az + 1) % SPECTRUM_AZ_CELLS, el));
            push(flat((az + SPECTRUM_AZ_CELLS - 1) % SPECTRUM_AZ_CELLS, el));
            if el + 1 < SPECTRUM_EL_CELLS {
                push(flat(az, el + 1));
            }
            if el > 0 {
                push(flat(az, el - 1));
            }
        }
        cells.sort_by_key(|c| (c.azimuth_deg, c.elevation_deg));
        regions.push(LobeRegion { cells });
    }
    Ok(regions)
}

fn wrap_to_half_circle(deg: f64) -> f64 {
    // map into (-180, 180]
    let w = deg.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Power-weighted RMS angular spread of one lobe region, azimuth and
/// elevation separately. Azimuth statistics are circular: the mean is the
/// vector mean and deviations are wrapped to (-180, 180].
pub fn rms_lobe_angular_spread(region: &LobeRegion) -> (f64, f64) {
    let total: f64 = region.cells.iter().map(|c| c.power_mw).sum();
    if total <= 0.0 || region.cells.is_empty() {
        return (0.0, 0.0);
    }

    let mut sin_sum = 0.0;
    let mut cos_sum = 0.0;
    let mut el_mean = 0.0;
    for c in &region.cells {
        let az_rad = (c.azimuth_deg as f64).to_radians();
        sin_sum += c.power_mw * az_rad.sin();
        cos_sum += c.power_mw * az_rad.cos();
        el_mean += c.power_mw * c.elevation_deg as f64;
    }
    let az_mean_deg = sin_sum.atan2(cos_sum).to_degrees();
    el_mean /= total;

    let mut az_var = 0.0;
    let mut el_var = 0.0;
    for c in &region.cells {
        let d_az = wrap_to_half_circle(c.azimuth_deg as f64 - az_mean_deg);
        let d_el = c.elevation_deg as f64 - el_mean;
        az_var += c.power_mw * d_az * d_az;
        el_var += c.power_mw * d_el * d_el;
    }
    ((az_var / total).sqrt(), (el_var / total).sqrt())
}

/// Secondary statistics of a generated ensemble plus the recovered decay
/// fits.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EnsembleStats {
    /// One RMS delay spread per realization with a nonempty PDP.
    pub rms_delay_spreads_ns: Vec<f64>,
    /// One azimuth spread per thresholded AOA lobe across the ensemble.
    pub rms_lobe_az_spreads_deg: Vec<f64>,
    /// One elevation spread per thresholded AOA lobe across the ensemble.
    pub rms_lobe_el_spreads_deg: Vec<f64>,
    pub cluster_counts: Vec<u32>,
    pub lobe_counts_aod: Vec<u32>,
    pub lobe_counts_aoa: Vec<u32>,
    /// Subpath decay time from the linear-scale regression over pooled
    /// normalized subpath powers.
    pub fitted_gamma_ns: f64,
    /// Cluster decay time from the linear-scale regression over pooled
    /// normalized cluster powers.
    pub fitted_big_gamma_ns: f64,
    /// Fitted normalized first-cluster power intercept.
    pub fitted_p0: f64,
    /// Fitted normalized first-subpath power intercept.
    pub fitted_pi0: f64,
    /// Realizations skipped because every subpath fell below the floor.
    pub skipped_empty: usize,
}

impl EnsembleStats {
    pub fn median_rms_delay_spread_ns(&self) -> f64 {
        median(&self.rms_delay_spreads_ns)
    }

    pub fn mean_rms_lobe_az_spread_deg(&self) -> f64 {
        mean(&self.rms_lobe_az_spreads_deg)
    }

    pub fn mean_rms_lobe_el_spread_deg(&self) -> f64 {
        mean(&self.rms_lobe_el_spreads_deg)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
