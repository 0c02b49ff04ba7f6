//! Aerial line-of-sight path loss, distance-correlated shadow fading and
//! received power.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Carrier frequency in GHz.
    pub fc_ghz: f64,
    /// GBS transmit power in dBm.
    pub p_gbs_dbm: f64,
    /// Shadowing correlation coefficient β at the decorrelation distance.
    pub beta: f64,
    /// Decorrelation distance X_c in meters.
    pub x_c_m: f64,
    /// Fixed shadowing deviation in dB; `None` uses the height model.
    pub sigma_sf_db: Option<f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            fc_ghz: 1.5,
            p_gbs_dbm: 46.0,
            beta: 0.82,
            x_c_m: 100.0,
            sigma_sf_db: None,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("fc_ghz", self.fc_ghz)?;
        ensure_positive("x_c_m", self.x_c_m)?;
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1), got {}", self.beta)));
        }
        if !self.p_gbs_dbm.is_finite() {
            return Err(Error::invalid("p_gbs_dbm", "must be finite"));
        }
        if let Some(s) = self.sigma_sf_db {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid("sigma_sf_db", format!("must be >= 0, got {s}")));
            }
        }
        Ok(())
    }

    /// Shadowing deviation in dB at UAV height `h_uav`.
    pub fn shadowing_sigma(&self, h_uav: f64) -> Result<f64> {
        let model = sigma_sf(h_uav)?;
        Ok(self.sigma_sf_db.unwrap_or(model))
    }
}

fn check_height(h_uav: f64) -> Result<()> {
    if (10.0..=300.0).contains(&h_uav) {
        Ok(())
    } else {
        Err(Error::invalid("h_uav", format!("must lie in [10, 300] m, got {h_uav}")))
    }
}

/// Shadow-fading standard deviation in dB at UAV height `h_uav` meters.
pub fn sigma_sf(h_uav: f64) -> Result<f64> {
    check_height(h_uav)?;
    Ok(4.2 * (-0.0046 * h_uav).exp())
}

/// Line-of-sight path loss with the height-dependent slope precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    slope: f64,
    intercept: f64,
}

impl PathLossModel {
    pub fn new(h_uav: f64, fc_ghz: f64) -> Result<Self> {
        check_height(h_uav)?;
        ensure_positive("fc_ghz", fc_ghz)?;
        Ok(Self {
            slope: (23.9 - 1.8 * h_uav.log10()).max(20.0),
            intercept: 20.0 * (40.0 * std::f64::consts::PI * fc_ghz / 3.0).log10(),
        })
    }

    /// Distance exponent multiplying log10(d3d).
    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Path loss in dB at `d3d` meters; `d3d` must be positive.
    pub fn at(&self, d3d: f64) -> f64 {
        self.slope * d3d.log10() + self.intercept
    }
}

/// Path loss in dB, shadowing excluded.
pub fn path_loss(d3d: f64, h_uav: f64, fc_ghz: f64) -> Result<f64> {
    ensure_positive("d3d", d3d)?;
    Ok(PathLossModel::new(h_uav, fc_ghz)?.at(d3d))
}

/// Correlation between shadowing samples `delta` meters apart: β^(Δ/X_c).
pub fn step_correlation(delta: f64, beta: f64, x_c: f64) -> f64 {
    beta.powf(delta / x_c)
}

#[inline]
fn ar1_update(prev: f64, rho: f64, sigma: f64, innovation: f64) -> f64 {
    rho * prev + sigma * (1.0 - rho * rho).sqrt() * innovation
}

/// Maps i.i.d. standard-normal innovations to a stationary AR(1) sequence
/// with marginal deviation `sigma` and lag-one correlation `rho`.
///
/// The first innovation sets the initial state `s_0 = sigma * w_0`.
pub fn ar1_filter(innovations: &[f64], rho: f64, sigma: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(innovations.len());
    let mut iter = innovations.iter();
    if let Some(&w0) = iter.next() {
        let mut s = sigma * w0;
        out.push(s);
        for &w in iter {
            s = ar1_update(s, rho, sigma, w);
            out.push(s);
        }
    }
    out
}

/// Shadowing at `n_points` equally spaced positions, `delta` meters apart,
/// with covariance σ²·β^(|i−j|·Δ/X_c).
pub fn correlated_sf_sequence<R: Rng + ?Sized>(
    n_points: usize,
    delta: f64,
    sigma: f64,
    beta: f64,
    x_c: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_points == 0 {
        return Err(Error::invalid("n_points", "must be >= 1"));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", format!("must be >= 0, got {delta}")));
    }
    let rho = step_correlation(delta, beta, x_c);
    let w: Vec<f64> = (0..n_points).map(|_| rng.sample(StandardNormal)).collect();
    Ok(ar1_filter(&w, rho, sigma))
}

/// Streaming shadow-fading state of one link.
#[derive(Debug, Clone)]
pub struct ShadowingProcess<R> {
    sigma: f64,
    rho_step: f64,
    value: f64,
    rng: R,
}

impl<R: Rng> ShadowingProcess<R> {
    /// Starts the process from its stationary distribution N(0, σ²).
    pub fn new(sigma: f64, rho_step: f64, mut rng: R) -> Self {
        let w: f64 = rng.sample(StandardNormal);
        Self {
            sigma,
            rho_step,
            value: sigma * w,
            rng,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho_step(&self) -> f64 {
        self.rho_step
    }

    /// Moves one measurement step along the trajectory.
    pub fn advance(&mut self) -> f64 {
        let w: f64 = self.rng.sample(StandardNormal);
        self.value = ar1_update(self.value, self.rho_step, self.sigma, w);
        self.value
    }

    /// Moves `steps` measurement steps at once (one innovation draw).
    pub fn advance_by(&mut self, steps: usize) -> f64 {
        match steps {
            0 => self.value,
            1 => self.advance(),
            _ => {
                let w: f64 = self.rng.sample(StandardNormal);
                let rho = self.rho_step.powi(steps as i32);
                self.value = ar1_update(self.value, rho, self.sigma, w);
                self.value
            }
        }
    }
}

/// Received power in dBm: P_GBS + A_A − (ξ + χ).
pub fn rsrp(p_gbs_dbm: f64, gain_db: f64, path_loss_db: f64, sf_db: f64) -> f64 {
    p_gbs_dbm + gain_db - (path_loss_db + sf_db)
}
