//! Distance draw and omnidirectional received power over the 1 m close-in
//! free-space reference path loss model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Speed of light in m/ns.
pub const SPEED_OF_LIGHT_M_PER_NS: f64 = 0.3;

/// Link-budget configuration. Defaults are the 28 GHz dense-urban NLOS fit
/// with the measurement system's transmit power and horn gains, so the
/// -100 dBm validation floor carries the same meaning as in the measured
/// data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    /// Path loss exponent of the close-in reference model.
    pub ple: f64,
    /// Lognormal shadow factor, dB.
    pub shadow_sigma_db: f64,
    /// Free-space path loss at the 1 m reference distance, dB.
    pub fspl_1m_db: f64,
    /// Carrier wavelength in metres. Informational only; the model's
    /// frequency dependence is entirely inside `fspl_1m_db`.
    pub wavelength_m: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            tx_gain_dbi: 24.5,
            rx_gain_dbi: 24.5,
            d_min_m: 60.0,
            d_max_m: 200.0,
            ple: 3.4,
            shadow_sigma_db: 9.7,
            fspl_1m_db: 61.4,
            wavelength_m: 0.0107,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, constraint: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("link.{field}"),
                    constraint: constraint.to_string(),
                })
            }
        };
        check(self.d_min_m >= 1.0, "d_min_m", ">= 1 (close-in reference bound)")?;
        check(self.d_min_m <= self.d_max_m, "d_min_m", "<= d_max_m")?;
        check(self.ple > 0.0, "ple", "> 0")?;
        check(self.shadow_sigma_db >= 0.0, "shadow_sigma_db", ">= 0")?;
        check(self.fspl_1m_db.is_finite(), "fspl_1m_db", "finite")?;
        Ok(())
    }
}

/// One drawn link: distance, shadowing, path loss, omnidirectional received
/// power, and the free-space propagation delay that anchors absolute timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    pub distance_m: f64,
    pub path_loss_db: f64,
    pub shadow_db: f64,
    pub omni_rx_power_dbm: f64,
    pub free_space_delay_ns: f64,
}

impl LinkState {
    pub fn omni_rx_power_mw(&self) -> f64 {
        dbm_to_mw(self.omni_rx_power_dbm)
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// T-R separation drawn uniformly over `[d_min, d_max)`.
pub fn draw_distance(cfg: &LinkConfig, rng: &mut RngStream) -> Result<f64> {
    rng.sample_uniform(cfg.d_min_m, cfg.d_max_m)
}

/// Zero-mean lognormal shadowing realization, in dB.
pub fn draw_shadow(cfg: &LinkConfig, rng: &mut RngStream) -> Result<f64> {
    rng.sample_normal(0.0, cfg.shadow_sigma_db)
}

/// NLOS path loss at distance `d` with an explicit shadowing realization.
pub fn path_loss_nlos(cfg: &LinkConfig, d_m: f64, shadow_db: f64) -> Result<f64> {
    if d_m < 1.0 {
        return Err(Error::DistanceBelowReference(d_m));
    }
    Ok(cfg.fspl_1m_db + 10.0 * cfg.ple * d_m.log10() + shadow_db)
}

/// Received power from the link budget: `P_t + G_t + G_r - PL`.
pub fn received_power(cfg: &LinkConfig, pl_db: f64) -> f64 {
    cfg.tx_power_dbm + cfg.tx_gain_dbi + cfg.rx_gain_dbi - pl_db
}

/// Draw a full link state: distance, shadowing, path loss, received power,
/// and free-space delay.
pub fn draw_link(cfg: &LinkConfig, rng: &mut RngStream) -> Result<LinkState> {
    let distance_m = draw_distance(cfg, rng)?;
    let shadow_db = draw_shadow(cfg, rng)?;
    let path_loss_db = path_loss_nlos(cfg, distance_m, shadow_db)?;
    Ok(LinkState {
        distance_m,
        path_loss_db,
        shadow_db,
        omni_rx_power_dbm: received_power(cfg, path_loss_db),
        free_space_delay_ns: distance_m / SPEED_OF_LIGHT_M_PER_NS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_at_reference_distance_is_intercept() {
        let cfg = LinkConfig::default();
        assert_eq!(path_loss_nlos(&cfg, 1.0, 0.0).unwrap(), 61.4);
    }

    #[test]
    fn path_loss_spot_values() {
        let cfg = LinkConfig::default();
        let pl = path_loss_nlos(&cfg, 100.0, 0.0).unwrap();
        assert!((pl - 129.4).abs() < 1e-12, "PL(100 m) = {pl}");
        let pl_shadowed = path_loss_nlos(&cfg, 100.0, 9.7).unwrap();
        assert!((pl_shadowed - 139.1).abs() < 1e-12, "PL(100 m)+9.7 = {pl_shadowed}");
    }

    #[test]
    fn path_loss_rejects_sub_reference_distance() {
        let cfg = LinkConfig::default();
        assert!(matches!(
            path_loss_nlos(&cfg, 0.5, 0.0),
            Err(Error::DistanceBelowReference(_))
        ));
    }

    #[test]
    fn received_power_spot_values() {
        let mut cfg = LinkConfig {
            tx_power_dbm: 30.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            ..LinkConfig::default()
        };
        assert!((received_power(&cfg, 129.4) - (-99.4)).abs() < 1e-12);

        cfg.tx_power_dbm = 0.0;
        assert_eq!(received_power(&cfg, 0.0), 0.0);

        cfg.tx_power_dbm = 30.0;
        cfg.tx_gain_dbi = 24.5;
        cfg.rx_gain_dbi = 24.5;
        assert!((received_power(&cfg, 139.1) - (-60.1)).abs() < 1e-12);
    }

    #[test]
    fn received_power_formula_is_reciprocal() {
        let cfg = LinkConfig::default();
        let pl = 137.3;
        let pr = received_power(&cfg, pl);
        assert_eq!(pr + pl - cfg.tx_gain_dbi - cfg.rx_gain_dbi, cfg.tx_power_dbm);
    }

    #[test]
    fn distance_draw_respects_bounds() {
        let cfg = LinkConfig::default();
        let mut rng = RngStream::from_seed(13);
        for _ in 0..1000 {
            let d = draw_distance(&cfg, &mut rng).unwrap();
            assert!((60.0..200.0).contains(&d));
        }

        let degenerate = LinkConfig {
            d_min_m: 100.0,
            d_max_m: 100.0,
            ..LinkConfig::default()
        };
        assert_eq!(draw_distance(&degenerate, &mut rng).unwrap(), 100.0);

        let standards = LinkConfig {
            d_min_m: 1.0,
            d_max_m: 200.0,
            ..LinkConfig::default()
        };
        for _ in 0..1000 {
            let d = draw_distance(&standards, &mut rng).unwrap();
            assert!((1.0..200.0).contains(&d));
        }
    }

    #[test]
    fn path_loss_monotone_in_distance() {
        let cfg = LinkConfig::default();
        let mut last = 0.0;
        for d in [1.0, 2.0, 10.0, 60.0, 100.0, 199.0] {
            let pl = path_loss_nlos(&cfg, d, 0.0).unwrap();
            assert!(pl > last, "PL should increase with d");
            last = pl;
        }
    }

    #[test]
    fn shadowing_std_matches_config() {
        let cfg = LinkConfig::default();
        let mut rng = RngStream::from_seed(14);
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
        assert!(
            (std - 9.7).abs() < 0.1,
            "shadow std {std} outside 9.7 +/- 0.1"
        );
    }

    #[test]
    fn free_space_delay_from_distance() {
        let cfg = LinkConfig {
            d_min_m: 60.0,
            d_max_m: 60.0,
            ..LinkConfig::default()
        };
        let mut rng = RngStream::from_seed(15);
        let link = draw_link(&cfg, &mut rng).unwrap();
        assert!((link.free_space_delay_ns - 200.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation_reports_field() {
        let bad = LinkConfig {
            d_min_m: 0.5,
            ..LinkConfig::default()
        };
        let err = bad.validate().unwrap_err();
        assert!(err.to_string().contains("link.d_min_m"), "{err}");
    }
}
