//! End-to-end generation of one channel realization from a single random
//! stream: link budget, temporal skeleton, lobe means, joint subpath
//! assignment, then finished AOD and AOA lobes.

use crate::error::Result;
use crate::link::draw_link;
use crate::params::ModelParams;
use crate::rng::RngStream;
use crate::spatial::{
    assign_subpaths_to_lobes, build_lobes, lobe_mean_azimuths, lobe_mean_elevations,
    ChannelRealization, LobeSide,
};
use crate::temporal::{draw_counts, generate_clusters};

/// Generate one complete channel realization. The draw order is fixed, so a
/// given `(seed, stream)` always produces the same realization.
pub fn generate_channel(params: &ModelParams, rng: &mut RngStream) -> Result<ChannelRealization> {
    let link = draw_link(&params.link, rng)?;
    let (n, l_aod, l_aoa) = draw_counts(
        &params.temporal,
        params.spatial.mu_aod,
        params.spatial.mu_aoa,
        params.spatial.l_max,
        rng,
    )?;
    let clusters = generate_clusters(
        n,
        link.omni_rx_power_mw(),
        link.free_space_delay_ns,
        &params.temporal,
        rng,
    )?;

    let aod_azimuths = lobe_mean_azimuths(l_aod, rng)?;
    let aod_elevations = lobe_mean_elevations(l_aod, LobeSide::Aod, &params.spatial, rng)?;
    let aoa_azimuths = lobe_mean_azimuths(l_aoa, rng)?;
    let aoa_elevations = lobe_mean_elevations(l_aoa, LobeSide::Aoa, &params.spatial, rng)?;

    let (assignment, aod_powers, aoa_powers) =
        assign_subpaths_to_lobes(&clusters, l_aod, l_aoa, rng)?;

    let aod_lobes = build_lobes(
        LobeSide::Aod,
        &aod_azimuths,
        &aod_elevations,
        &aod_powers,
        &params.spatial,
        rng,
    )?;
    let aoa_lobes = build_lobes(
        LobeSide::Aoa,
        &aoa_azimuths,
        &aoa_elevations,
        &aoa_powers,
        &params.spatial,
        rng,
    )?;

    Ok(ChannelRealization {
        link,
        clusters,
        aod_lobes,
        aoa_lobes,
        assignment,
    })
}

/// Generate realization `index` of an ensemble keyed by `seed`, on its own
/// derived sub-stream.
pub fn generate_indexed(params: &ModelParams, seed: u64, index: u64) -> Result<ChannelRealization> {
    let mut rng = RngStream::substream(seed, index);
    generate_channel(params, &mut rng)
}
