//! Spatial skeleton of a channel realization: AOD/AOA lobe means and spreads,
//! subpath-to-lobe assignment, 1-degree lobe discretization with Gaussian
//! power shaping, joint power spectra, and the omnidirectional impulse
//! response taps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::LinkState;
use crate::rng::RngStream;
use crate::temporal::TimeCluster;

/// Transmitter (departure) or receiver (arrival) side of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LobeSide {
    Aod,
    Aoa,
}

impl std::fmt::Display for LobeSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LobeSide::Aod => write!(f, "aod"),
            LobeSide::Aoa => write!(f, "aoa"),
        }
    }
}

/// Constants of the spatial generator. Azimuth spreads, elevation spreads,
/// and segment-shaping widths are side-specific fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialParams {
    /// Maximum number of lobes per side.
    pub l_max: u32,
    /// Mean AOD lobe count feeding the Poisson draw.
    pub mu_aod: f64,
    /// Mean AOA lobe count feeding the Poisson draw.
    pub mu_aoa: f64,
    pub aod_elev_mean_deg: f64,
    pub aod_elev_std_deg: f64,
    pub aoa_elev_mean_deg: f64,
    pub aoa_elev_std_deg: f64,
    /// AOD lobe azimuth spread: normal draw, floored.
    pub aod_az_spread_mean_deg: f64,
    pub aod_az_spread_std_deg: f64,
    pub aod_az_spread_floor_deg: u32,
    /// AOD lobe elevation spread is fixed.
    pub aod_elev_spread_deg: u32,
    /// AOA lobe azimuth spread: discrete lognormal moments.
    pub aoa_az_spread_dln_mean_deg: f64,
    pub aoa_az_spread_dln_std_deg: f64,
    /// AOA lobe elevation spread: normal draw, floored.
    pub aoa_elev_spread_mean_deg: f64,
    pub aoa_elev_spread_std_deg: f64,
    pub aoa_elev_spread_floor_deg: u32,
    /// Segment-shaping azimuth width, AOD side.
    pub aod_sigma_theta_mean_deg: f64,
    pub aod_sigma_theta_std_deg: f64,
    /// Segment-shaping elevation width, AOD side.
    pub aod_sigma_phi_mean_deg: f64,
    pub aod_sigma_phi_std_deg: f64,
    /// Segment-shaping azimuth width, AOA side.
    pub aoa_sigma_theta_mean_deg: f64,
    pub aoa_sigma_theta_std_deg: f64,
    /// Segment-shaping elevation width, AOA side.
    pub aoa_sigma_phi_mean_deg: f64,
    pub aoa_sigma_phi_std_deg: f64,
    /// Non-positive shaping-width draws are redrawn and floored here.
    pub sigma_floor_deg: f64,
    /// Relative floor of the segment shaping profile.
    pub segment_floor: f64,
    /// Maximum tolerated azimuth-extent overlap between adjacent lobes,
    /// as a fraction of the narrower lobe's extent.
    pub max_lobe_overlap: f64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            l_max: 5,
            mu_aod: 1.6,
            mu_aoa: 1.7,
            aod_elev_mean_deg: -4.9,
            aod_elev_std_deg: 4.5,
            aoa_elev_mean_deg: 3.6,
            aoa_elev_std_deg: 4.8,
            aod_az_spread_mean_deg: 30.0,
            aod_az_spread_std_deg: 16.0,
            aod_az_spread_floor_deg: 5,
            aod_elev_spread_deg: 10,
            aoa_az_spread_dln_mean_deg: 32.0,
            aoa_az_spread_dln_std_deg: 18.0,
            aoa_elev_spread_mean_deg: 31.0,
            aoa_elev_spread_std_deg: 11.0,
            aoa_elev_spread_floor_deg: 5,
            aod_sigma_theta_mean_deg: 6.6,
            aod_sigma_theta_std_deg: 3.5,
            aod_sigma_phi_mean_deg: 5.0,
            aod_sigma_phi_std_deg: 0.0,
            aoa_sigma_theta_mean_deg: 6.0,
            aoa_sigma_theta_std_deg: 1.0,
            aoa_sigma_phi_mean_deg: 6.0,
            aoa_sigma_phi_std_deg: 2.0,
            sigma_floor_deg: 0.5,
            segment_floor: 0.1,
            max_lobe_overlap: 0.10,
        }
    }
}

impl SpatialParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, constraint: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("spatial.{field}"),
                    constraint: constraint.to_string(),
                })
            }
        };
        check(self.l_max >= 1, "l_max", ">= 1")?;
        check(self.mu_aod > 0.0, "mu_aod", "> 0")?;
        check(self.mu_aoa > 0.0, "mu_aoa", "> 0")?;
        check(self.aod_elev_std_deg >= 0.0, "aod_elev_std_deg", ">= 0")?;
        check(self.aoa_elev_std_deg >= 0.0, "aoa_elev_std_deg", ">= 0")?;
        check(self.aod_az_spread_std_deg >= 0.0, "aod_az_spread_std_deg", ">= 0")?;
        check(self.aod_az_spread_floor_deg >= 1, "aod_az_spread_floor_deg", ">= 1")?;
        check(self.aod_elev_spread_deg >= 1, "aod_elev_spread_deg", ">= 1")?;
        check(
            self.aoa_az_spread_dln_mean_deg > 0.0,
            "aoa_az_spread_dln_mean_deg",
            "> 0",
        )?;
        check(
            self.aoa_az_spread_dln_std_deg >= 0.0,
            "aoa_az_spread_dln_std_deg",
            ">= 0",
        )?;
        check(self.aoa_elev_spread_std_deg >= 0.0, "aoa_elev_spread_std_deg", ">= 0")?;
        check(self.aoa_elev_spread_floor_deg >= 1, "aoa_elev_spread_floor_deg", ">= 1")?;
        check(self.sigma_floor_deg > 0.0, "sigma_floor_deg", "> 0")?;
        check(
            self.segment_floor > 0.0 && self.segment_floor <= 1.0,
            "segment_floor",
            "in (0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.max_lobe_overlap),
            "max_lobe_overlap",
            "in [0, 1]",
        )?;
        Ok(())
    }

    fn elev_mean_std(&self, side: LobeSide) -> (f64, f64) {
        match side {
            LobeSide::Aod => (self.aod_elev_mean_deg, self.aod_elev_std_deg),
            LobeSide::Aoa => (self.aoa_elev_mean_deg, self.aoa_elev_std_deg),
        }
    }

    fn sigma_theta_mean_std(&self, side: LobeSide) -> (f64, f64) {
        match side {
            LobeSide::Aod => (self.aod_sigma_theta_mean_deg, self.aod_sigma_theta_std_deg),
            LobeSide::Aoa => (self.aoa_sigma_theta_mean_deg, self.aoa_sigma_theta_std_deg),
        }
    }

    fn sigma_phi_mean_std(&self, side: LobeSide) -> (f64, f64) {
        match side {
            LobeSide::Aod => (self.aod_sigma_phi_mean_deg, self.aod_sigma_phi_std_deg),
            LobeSide::Aoa => (self.aoa_sigma_phi_mean_deg, self.aoa_sigma_phi_std_deg),
        }
    }
}

/// One 1-degree-by-1-degree cell of a discretized lobe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeSegment {
    /// Azimuth wrapped to [0, 360).
    pub azimuth_deg: u16,
    pub elevation_deg: i16,
    /// Offset from the lobe mean azimuth before wrapping.
    pub az_offset_deg: i16,
    pub el_offset_deg: i16,
    pub power_mw: f64,
}

/// One spatial lobe: a contiguous span of departure or arrival angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialLobe {
    pub side: LobeSide,
    /// 1-based lobe index within its side.
    pub index: u32,
    pub mean_azimuth_deg: i32,
    pub mean_elevation_deg: i32,
    /// Azimuth spread in whole degrees (number of azimuth segments).
    pub azimuth_spread_deg: u32,
    /// Elevation spread in whole degrees (number of elevation segments).
    pub elevation_spread_deg: u32,
    /// Sum of assigned subpath powers. Segment powers are a shaped profile
    /// over this value, not a partition of it.
    pub total_power_mw: f64,
    pub sigma_theta_deg: f64,
    pub sigma_phi_deg: f64,
    pub segments: Vec<LobeSegment>,
}

/// Joint lobe assignment of one subpath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LobeAssignment {
    pub cluster: u32,
    pub subpath: u32,
    pub aod_lobe: u32,
    pub aoa_lobe: u32,
}

/// One fully generated channel: link state, temporal skeleton, spatial lobes
/// on both sides, and the per-subpath joint lobe assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub link: LinkState,
    pub clusters: Vec<TimeCluster>,
    pub aod_lobes: Vec<SpatialLobe>,
    pub aoa_lobes: Vec<SpatialLobe>,
    /// Ordered by (cluster, subpath); one entry per subpath.
    pub assignment: Vec<LobeAssignment>,
}

impl ChannelRealization {
    pub fn subpath_count(&self) -> usize {
        self.clusters.iter().map(|c| c.subpaths.len()).sum()
    }

    pub fn total_subpath_power_mw(&self) -> f64 {
        self.clusters
            .iter()
            .flat_map(|c| c.subpaths.iter().map(|sp| sp.power_mw))
            .sum()
    }

    pub fn lobes(&self, side: LobeSide) -> &[SpatialLobe] {
        match side {
            LobeSide::Aod => &self.aod_lobes,
            LobeSide::Aoa => &self.aoa_lobes,
        }
    }

    pub fn lobe_power_sum_mw(&self, side: LobeSide) -> f64 {
        self.lobes(side).iter().map(|l| l.total_power_mw).sum()
    }

    /// Joint (AOD, AOA) lobe indices assigned to subpath `(n, m)`, 1-based.
    pub fn lobe_assignment(&self, cluster: u32, subpath: u32) -> Option<(u32, u32)> {
        self.assignment
            .binary_search_by_key(&(cluster, subpath), |a| (a.cluster, a.subpath))
            .ok()
            .map(|i| (self.assignment[i].aod_lobe, self.assignment[i].aoa_lobe))
    }
}

/// Mean lobe azimuths, one draw per equal circular sector so lobe means
/// cannot collide across sectors. Values are wrapped to [0, 360).
pub fn lobe_mean_azimuths(l: u32, rng: &mut RngStream) -> Result<Vec<i32>> {
    (1..=l)
        .map(|i| {
            let lo = (360.0 * (i - 1) as f64 / l as f64).ceil() as i64;
            let hi = (360.0 * i as f64 / l as f64).floor() as i64;
            let theta = rng.sample_discrete_uniform(lo, hi)?;
            Ok(theta.rem_euclid(360) as i32)
        })
        .collect()
}

/// Mean lobe elevations: integer-rounded normal draws, positive above the
/// horizon, clamped to the physical [-90, 90] range.
pub fn lobe_mean_elevations(
    l: u32,
    side: LobeSide,
    params: &SpatialParams,
    rng: &mut RngStream,
) -> Result<Vec<i32>> {
    let (mean, std) = params.elev_mean_std(side);
    (0..l)
        .map(|_| {
            let phi = rng.sample_normal(mean, std)?.round();
            Ok(phi.clamp(-90.0, 90.0) as i32)
        })
        .collect()
}

/// Distribute subpath powers over lobe indices drawn uniformly per subpath.
/// Deterministic core of the assignment step.
pub fn accumulate_lobe_powers(powers: &[f64], draws: &[u32], l: u32) -> Vec<f64> {
    let mut lobe_powers = vec![0.0; l as usize];
    for (&p, &w) in powers.iter().zip(draws) {
        lobe_powers[(w - 1) as usize] += p;
    }
    lobe_powers
}

/// Assign every subpath one joint (AOD, AOA) lobe combination and total the
/// per-lobe powers on each side.
pub fn assign_subpaths_to_lobes(
    clusters: &[TimeCluster],
    l_aod: u32,
    l_aoa: u32,
    rng: &mut RngStream,
) -> Result<(Vec<LobeAssignment>, Vec<f64>, Vec<f64>)> {
    let mut assignment = Vec::new();
    let mut powers = Vec::new();
    let mut aod_draws = Vec::new();
    let mut aoa_draws = Vec::new();
    for cluster in clusters {
        for sp in &cluster.subpaths {
            let w_aod = rng.sample_discrete_uniform(1, l_aod as i64)? as u32;
            let w_aoa = rng.sample_discrete_uniform(1, l_aoa as i64)? as u32;
            assignment.push(LobeAssignment {
                cluster: cluster.index,
                subpath: sp.subpath_index,
                aod_lobe: w_aod,
                aoa_lobe: w_aoa,
            });
            powers.push(sp.power_mw);
            aod_draws.push(w_aod);
            aoa_draws.push(w_aoa);
        }
    }
    let aod_powers = accumulate_lobe_powers(&powers, &aod_draws, l_aod);
    let aoa_powers = accumulate_lobe_powers(&powers, &aoa_draws, l_aoa);
    Ok((assignment, aod_powers, aoa_powers))
}

/// Overlap length, in degrees, of two circular arcs centred at `c1`/`c2`
/// with widths `w1`/`w2` on the 360-degree circle.
fn circular_overlap(c1: f64, w1: f64, c2: f64, w2: f64) -> f64 {
    let d = (c1 - c2).rem_euclid(360.0);
    let d = d.min(360.0 - d);
    let half_sum = (w1 + w2) / 2.0;
    let near = (half_sum - d).max(0.0);
    let far = (half_sum - (360.0 - d)).max(0.0);
    (near + far).min(w1.min(w2))
}

fn draw_azimuth_spread(side: LobeSide, params: &SpatialParams, rng: &mut RngStream) -> Result<u32> {
    match side {
        LobeSide::Aod => {
            let k = rng
                .sample_normal(params.aod_az_spread_mean_deg, params.aod_az_spread_std_deg)?
                .round() as i64;
            Ok(k.max(params.aod_az_spread_floor_deg as i64) as u32)
        }
        LobeSide::Aoa => rng
            .sample_discrete_lognormal(
                params.aoa_az_spread_dln_mean_deg,
                params.aoa_az_spread_dln_std_deg,
            )
            .map(|k| k as u32),
    }
}

fn draw_elevation_spread(side: LobeSide, params: &SpatialParams, rng: &mut RngStream) -> Result<u32> {
    match side {
        LobeSide::Aod => Ok(params.aod_elev_spread_deg),
        LobeSide::Aoa => {
            let h = rng
                .sample_normal(params.aoa_elev_spread_mean_deg, params.aoa_elev_spread_std_deg)?
                .round() as i64;
            Ok(h.max(params.aoa_elev_spread_floor_deg as i64) as u32)
        }
    }
}

/// Per-lobe azimuth and elevation spreads `(K_i, H_i)` for one side, with
/// adjacent-lobe azimuth overlap held at or below the configured fraction of
/// the narrower extent.
///
/// Violating spreads are redrawn up to 100 times, then the wider lobe is
/// narrowed until the bound holds (never below the side's spread floor).
/// Adjacent lobes that both drew the shared sector boundary have coincident
/// means; the bound is unattainable there and the clamp stops at the floor.
pub fn lobe_spreads(
    azimuths: &[i32],
    side: LobeSide,
    params: &SpatialParams,
    rng: &mut RngStream,
) -> Result<Vec<(u32, u32)>> {
    let l = azimuths.len();
    let mut spreads = Vec::with_capacity(l);
    for _ in 0..l {
        let k = draw_azimuth_spread(side, params, rng)?;
        let h = draw_elevation_spread(side, params, rng)?;
        spreads.push((k, h));
    }
    if l < 2 {
        return Ok(spreads);
    }

    // adjacent pairs on the circle; for two lobes the single pair already
    // sees both arcs between them
    let pairs: Vec<(usize, usize)> = if l == 2 {
        vec![(0, 1)]
    } else {
        (0..l).map(|i| (i, (i + 1) % l)).collect()
    };
    let violates = |ks: &[(u32, u32)], i: usize, j: usize| {
        let (wi, wj) = (ks[i].0 as f64, ks[j].0 as f64);
        let overlap = circular_overlap(azimuths[i] as f64, wi, azimuths[j] as f64, wj);
        overlap > params.max_lobe_overlap * wi.min(wj) + 1e-12
    };

    for _ in 0..100 {
        let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| violates(&spreads, i, j)) else {
            return Ok(spreads);
        };
        let wider = if spreads[i].0 >= spreads[j].0 { i } else { j };
        spreads[wider].0 = draw_azimuth_spread(side, params, rng)?;
    }

    // clamp pass: narrowing only shrinks overlaps, so one ordered sweep settles
    let floor = match side {
        LobeSide::Aod => params.aod_az_spread_floor_deg,
        LobeSide::Aoa => 1,
    };
    for &(i, j) in &pairs {
        while violates(&spreads, i, j) {
            let wider = if spreads[i].0 >= spreads[j].0 { i } else { j };
            if spreads[wider].0 <= floor {
                break; // bound unattainable for coincident means; keep floor
            }
            spreads[wider].0 -= 1;
        }
    }
    Ok(spreads)
}

/// Azimuth segment offsets for a lobe of spread `k`; the even case gives up
/// one end cell chosen by the coin `x`.
pub fn azimuth_offsets(k: u32, x: i32) -> Vec<i32> {
    let k = k as i32;
    if k % 2 != 0 {
        (-(k - 1) / 2..=(k - 1) / 2).collect()
    } else {
        (-k / 2 + (1 - x)..=k / 2 - x).collect()
    }
}

/// Elevation segment offsets for a lobe of spread `h`, with coin `w`.
pub fn elevation_offsets(h: u32, w: i32) -> Vec<i32> {
    let h = h as i32;
    if h % 2 != 0 {
        (-(h - 1) / 2..=(h - 1) / 2).collect()
    } else {
        (-h / 2 + w..=h / 2 - (1 - w)).collect()
    }
}

/// Discretize a lobe into 1-degree offset pairs `(az_offset, el_offset)`,
/// azimuth-major. Even spreads draw their end-asymmetry coins here.
pub fn discretize_lobe(k: u32, h: u32, rng: &mut RngStream) -> Result<Vec<(i32, i32)>> {
    let x = if k.is_multiple_of(2) {
        rng.sample_discrete_uniform(0, 1)? as i32
    } else {
        0
    };
    let w = if h.is_multiple_of(2) {
        rng.sample_discrete_uniform(0, 1)? as i32
    } else {
        0
    };
    let az = azimuth_offsets(k, x);
    let el = elevation_offsets(h, w);
    let mut cells = Vec::with_capacity(az.len() * el.len());
    for &a in &az {
        for &e in &el {
            cells.push((a, e));
        }
    }
    Ok(cells)
}

/// Gaussian segment shaping factor with a relative floor.
pub fn shape_factor(d_az: f64, d_el: f64, sigma_theta: f64, sigma_phi: f64, floor: f64) -> f64 {
    let exponent = -0.5
        * ((d_az * d_az) / (sigma_theta * sigma_theta)
            + (d_el * d_el) / (sigma_phi * sigma_phi));
    exponent.exp().max(floor)
}

/// Side-specific segment shaping widths; non-positive draws are redrawn and
/// the result is floored at `sigma_floor_deg`.
pub fn draw_segment_sigmas(
    side: LobeSide,
    params: &SpatialParams,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let floor = params.sigma_floor_deg;
    let mut draw = |mean: f64, std: f64| -> Result<f64> {
        let mut value = rng.sample_normal(mean, std)?;
        for _ in 0..100 {
            if value > 0.0 {
                break;
            }
            value = rng.sample_normal(mean, std)?;
        }
        Ok(value.max(floor))
    };
    let (tm, ts) = params.sigma_theta_mean_std(side);
    let (pm, ps) = params.sigma_phi_mean_std(side);
    Ok((draw(tm, ts)?, draw(pm, ps)?))
}

/// Shape the lobe power over its discretized segments. Segments keep the full
/// lobe power scaled by the shaping factor; cells pushed past the elevation
/// poles are dropped.
pub fn segment_powers(
    mean_azimuth_deg: i32,
    mean_elevation_deg: i32,
    offsets: &[(i32, i32)],
    total_power_mw: f64,
    sigma_theta: f64,
    sigma_phi: f64,
    floor: f64,
) -> Vec<LobeSegment> {
    offsets
        .iter()
        .filter_map(|&(d_az, d_el)| {
            let el = mean_elevation_deg + d_el;
            if !(-90..=90).contains(&el) {
                return None;
            }
            let az = (mean_azimuth_deg + d_az).rem_euclid(360);
            let r = shape_factor(d_az as f64, d_el as f64, sigma_theta, sigma_phi, floor);
            Some(LobeSegment {
                azimuth_deg: az as u16,
                elevation_deg: el as i16,
                az_offset_deg: d_az as i16,
                el_offset_deg: d_el as i16,
                power_mw: r * total_power_mw,
            })
        })
        .collect()
}

/// Build the finished lobes for one side: spreads, discretization, shaping
/// widths, and segment powers over the already-assigned lobe powers.
pub fn build_lobes(
    side: LobeSide,
    azimuths: &[i32],
    elevations: &[i32],
    lobe_powers: &[f64],
    params: &SpatialParams,
    rng: &mut RngStream,
) -> Result<Vec<SpatialLobe>> {
    let spreads = lobe_spreads(azimuths, side, params, rng)?;
    let mut lobes = Vec::with_capacity(azimuths.len());
    for (i, (&(k, h), (&az, (&el, &power)))) in spreads
        .iter()
        .zip(azimuths.iter().zip(elevations.iter().zip(lobe_powers)))
        .enumerate()
    {
        let offsets = discretize_lobe(k, h, rng)?;
        let (sigma_theta, sigma_phi) = draw_segment_sigmas(side, params, rng)?;
        let segments = segment_powers(
            az,
            el,
            &offsets,
            power,
            sigma_theta,
            sigma_phi,
            params.segment_floor,
        );
        lobes.push(SpatialLobe {
            side,
            index: i as u32 + 1,
            mean_azimuth_deg: az,
            mean_elevation_deg: el,
            azimuth_spread_deg: k,
            elevation_spread_deg: h,
            total_power_mw: power,
            sigma_theta_deg: sigma_theta,
            sigma_phi_deg: sigma_phi,
            segments,
        });
    }
    Ok(lobes)
}

/// Dense joint power grid over 1-degree azimuth/elevation cells.
pub struct PowerSpectrum {
    cells: Vec<f64>,
}

pub const SPECTRUM_AZ_CELLS: usize = 360;
pub const SPECTRUM_EL_CELLS: usize = 181;

impl PowerSpectrum {
    pub fn new() -> Self {
        Self {
            cells: vec![0.0; SPECTRUM_AZ_CELLS * SPECTRUM_EL_CELLS],
        }
    }

    fn index(azimuth_deg: u16, elevation_deg: i16) -> usize {
        debug_assert!((azimuth_deg as usize) < SPECTRUM_AZ_CELLS);
        debug_assert!((-90..=90).contains(&elevation_deg));
        azimuth_deg as usize * SPECTRUM_EL_CELLS + (elevation_deg + 90) as usize
    }

    /// Accumulate power into a cell; wrapped lobes add, never overwrite.
    pub fn add(&mut self, azimuth_deg: u16, elevation_deg: i16, power_mw: f64) {
        self.cells[Self::index(azimuth_deg, elevation_deg)] += power_mw;
    }

    pub fn get(&self, azimuth_deg: u16, elevation_deg: i16) -> f64 {
        self.cells[Self::index(azimuth_deg, elevation_deg)]
    }

    pub fn peak_mw(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_mw(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn nonzero_cells(&self) -> impl Iterator<Item = (u16, i16, f64)> + '_ {
        self.cells.iter().enumerate().filter_map(|(i, &p)| {
            if p > 0.0 {
                let az = (i / SPECTRUM_EL_CELLS) as u16;
                let el = (i % SPECTRUM_EL_CELLS) as i16 - 90;
                Some((az, el, p))
            } else {
                None
            }
        })
    }
}

impl Default for PowerSpectrum {
    fn default() -> Self {
        Self::new()
    }
}

/// Sum one side's shaped lobe segments onto the 360x181 grid.
pub fn assemble_spectrum(realization: &ChannelRealization, side: LobeSide) -> PowerSpectrum {
    let mut spectrum = PowerSpectrum::new();
    for lobe in realization.lobes(side) {
        for seg in &lobe.segments {
            spectrum.add(seg.azimuth_deg, seg.elevation_deg, seg.power_mw);
        }
    }
    spectrum
}

/// One impulse-response tap: a subpath with its assigned lobe mean angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub cluster: u32,
    pub subpath: u32,
    pub time_ns: f64,
    pub power_mw: f64,
    /// Amplitude in sqrt-mW.
    pub amplitude: f64,
    pub phase_rad: f64,
    pub aod_azimuth_deg: i32,
    pub aod_elevation_deg: i32,
    pub aoa_azimuth_deg: i32,
    pub aoa_elevation_deg: i32,
    pub aod_lobe: u32,
    pub aoa_lobe: u32,
    pub below_floor: bool,
}

/// Flatten a realization into time-sorted impulse-response taps. Tap angles
/// are the mean angles of the assigned lobes; segments only shape the
/// power-spectrum view.
pub fn impulse_response(realization: &ChannelRealization) -> Vec<Tap> {
    let mut taps = Vec::with_capacity(realization.subpath_count());
    let mut entries = realization.assignment.iter();
    for cluster in &realization.clusters {
        for sp in &cluster.subpaths {
            let a = entries.next().expect("one assignment entry per subpath");
            debug_assert_eq!((a.cluster, a.subpath), (cluster.index, sp.subpath_index));
            let aod = &realization.aod_lobes[(a.aod_lobe - 1) as usize];
            let aoa = &realization.aoa_lobes[(a.aoa_lobe - 1) as usize];
            taps.push(Tap {
                cluster: cluster.index,
                subpath: sp.subpath_index,
                time_ns: sp.abs_time_ns,
                power_mw: sp.power_mw,
                amplitude: sp.power_mw.sqrt(),
                phase_rad: sp.phase_rad,
                aod_azimuth_deg: aod.mean_azimuth_deg,
                aod_elevation_deg: aod.mean_elevation_deg,
                aoa_azimuth_deg: aoa.mean_azimuth_deg,
                aoa_elevation_deg: aoa.mean_elevation_deg,
                aod_lobe: a.aod_lobe,
                aoa_lobe: a.aoa_lobe,
                below_floor: sp.below_floor,
            });
        }
    }
    taps.sort_by(|a, b| a.time_ns.total_cmp(&b.time_ns));
    taps
}
