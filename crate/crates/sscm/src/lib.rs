//! Statistical spatial channel model (SSCM) for 28 GHz dense-urban NLOS links.
//!
//! Generates 3-D omnidirectional channel impulse responses built from time
//! clusters of intra-cluster subpaths and AOD/AOA spatial lobes, plus the
//! measurement-side analysis (power delay profiles, cluster partitioning,
//! lobe thresholding, RMS spreads) used to validate generated ensembles.

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod generator;
pub mod io;
pub mod link;
pub mod params;
pub mod rng;
pub mod spatial;
pub mod temporal;

pub use error::Error;
pub use params::ModelParams;
pub use rng::RngStream;

/// Schema version stamped into every structured output record.
pub const FORMAT_VERSION: u32 = 1;
