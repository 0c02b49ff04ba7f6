//! Velocity estimation from handover counts.
//!
//! Under the Poisson count model with rate λ = K·v, the count h is a
//! sufficient statistic for v, `v̂ = h / K` is unbiased, and its variance
//! v/K equals the Cramér–Rao bound 1/I(v) with Fisher information I(v) = K/v.
//! Velocities are in km/h throughout.

use serde::{Deserialize, Serialize};

use crate::campaign::HocDataset;
use crate::error::{ensure_positive, Error, Result};
use crate::statistics::{poisson_pmf, FitParams};
use crate::SECONDS_PER_HOUR;

/// Expected handovers per unit velocity, K = a·λ_GBS^b·T (T in hours).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RateCoefficient(f64);

impl RateCoefficient {
    pub fn new(k: f64) -> Result<Self> {
        ensure_positive("k", k)?;
        Ok(Self(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Expected count λ = K·v at velocity `v_kmh`.
    pub fn expected_count(self, v_kmh: f64) -> f64 {
        self.0 * v_kmh
    }
}

pub fn rate_coefficient(fit: &FitParams, lambda_gbs: f64, t_window_s: f64) -> Result<RateCoefficient> {
    ensure_positive("a", fit.a)?;
    ensure_positive("lambda_gbs", lambda_gbs)?;
    ensure_positive("t_window_s", t_window_s)?;
    RateCoefficient::new(fit.a * lambda_gbs.powf(fit.b) * (t_window_s / SECONDS_PER_HOUR))
}

/// v̂ = h / K.
pub fn estimate_velocity(hoc: u32, k: RateCoefficient) -> f64 {
    f64::from(hoc) / k.0
}

/// v̂ from several windows: mean(h) / K.
pub fn estimate_velocity_mean(hocs: &[u32], k: RateCoefficient) -> Result<f64> {
    if hocs.is_empty() {
        return Err(Error::EmptyInput("hoc samples"));
    }
    let total: u64 = hocs.iter().map(|&h| u64::from(h)).sum();
    Ok(total as f64 / hocs.len() as f64 / k.0)
}

/// ∂ log f(h; v) / ∂v = −K(1 − h/λ).
pub fn score(hoc: u64, v_kmh: f64, k: RateCoefficient) -> f64 {
    -k.0 * (1.0 - hoc as f64 / k.expected_count(v_kmh))
}

pub fn fisher_information(v_kmh: f64, k: RateCoefficient) -> Result<f64> {
    ensure_positive("v", v_kmh)?;
    Ok(k.0 / v_kmh)
}

/// Lower bound on the variance of any unbiased velocity estimate, (km/h)².
pub fn crlb(v_kmh: f64, k: RateCoefficient) -> Result<f64> {
    ensure_positive("v", v_kmh)?;
    Ok(v_kmh / k.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityResidual {
    /// Σ_h f(h; v)·score(h) over the truncated support.
    pub residual: f64,
    /// Poisson mass beyond the truncation point.
    pub tail_mass: f64,
}

impl RegularityResidual {
    /// Whether the truncation left enough mass out to distort the residual.
    pub fn truncation_warning(&self) -> bool {
        self.tail_mass >= 1e-12
    }
}

/// Expected score under the model, truncated at `truncation`; zero when the
/// regularity condition holds.
pub fn regularity_check(v_kmh: f64, k: RateCoefficient, truncation: u64) -> Result<RegularityResidual> {
    ensure_positive("v", v_kmh)?;
    let lambda = k.expected_count(v_kmh);
    let mut residual = 0.0;
    let mut mass = 0.0;
    for h in 0..=truncation {
        let p = poisson_pmf(lambda, h)?;
        residual += p * score(h, v_kmh, k);
        mass += p;
    }
    Ok(RegularityResidual {
        residual,
        tail_mass: (1.0 - mass).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub v_true: f64,
    pub lambda_gbs: f64,
    pub t_window_s: f64,
    pub n: usize,
    pub mean_vhat: f64,
    /// Unbiased sample variance of the per-window estimates.
    pub var_vhat: f64,
    pub crlb: f64,
    pub rmse: f64,
}

/// Applies the estimator to every window of a dataset and compares against
/// the true velocity of the scenario.
pub fn evaluate(dataset: &HocDataset, fit: &FitParams) -> Result<EstimatorReport> {
    let n = dataset.samples.len();
    if n < 2 {
        return Err(Error::invalid("dataset", format!("need at least 2 samples, got {n}")));
    }
    let key = dataset.key;
    let k = rate_coefficient(fit, key.lambda_gbs, key.t_window_s)?;
    let estimates: Vec<f64> = dataset
        .samples
        .iter()
        .map(|s| estimate_velocity(s.hoc, k))
        .collect();
    let mean = estimates.iter().sum::<f64>() / n as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let mse = estimates
        .iter()
        .map(|e| (e - key.velocity_kmh).powi(2))
        .sum::<f64>()
        / n as f64;
    let bound = if key.velocity_kmh > 0.0 {
        crlb(key.velocity_kmh, k)?
    } else {
        0.0
    };
    Ok(EstimatorReport {
        v_true: key.velocity_kmh,
        lambda_gbs: key.lambda_gbs,
        t_window_s: key.t_window_s,
        n,
        mean_vhat: mean,
        var_vhat: var,
        crlb: bound,
        rmse: mse.sqrt(),
    })
}
