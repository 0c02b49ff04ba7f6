//! Handover-count (HOC) statistics and velocity estimation for a
//! cellular-connected UAV flying a straight line over a Poisson field of
//! three-sector ground base stations.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: PPP site layouts, trajectory sampling and link angles.
//! - [`antenna`]: sector element pattern and vertical array factor.
//! - [`channel`]: aerial line-of-sight path loss, correlated shadowing, RSRP.
//! - [`handover`]: A3 event with hysteresis and time-to-trigger.
//! - [`campaign`]: deterministic Monte Carlo trials over a scenario grid.
//! - [`statistics`]: empirical PMFs, Poisson fits and the power-law fit.
//! - [`estimator`]: rate coefficient, MVU velocity estimator and its bound.
//! - [`persist`]: CSV and manifest formats shared with the CLI.

pub mod antenna;
pub mod campaign;
pub mod channel;
mod error;
pub mod estimator;
pub mod geometry;
pub mod handover;
pub mod persist;
pub mod statistics;

pub use error::{Error, Result};

/// Converts km/h to m/s.
pub fn kmh_to_mps(v_kmh: f64) -> f64 {
    v_kmh / 3.6
}

pub const SECONDS_PER_HOUR: f64 = 3600.0;
