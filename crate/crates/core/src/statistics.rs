//! Empirical HOC PMFs, the Poisson count model and the power-law fit of its
//! rate parameter.
//!
//! The fitted model is `λ = a · λ_GBS^b · d` with λ_GBS in sites/km² and the
//! flown distance `d = v·T` in km (v in km/h, T in hours).

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::campaign::{HocDataset, ScenarioKey};
use crate::error::{Error, Result};

/// Relative frequencies of HOC values over `0..=max(samples)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPmf {
    probabilities: Vec<f64>,
}

impl EmpiricalPmf {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Number of support points L (max observed count + 1).
    pub fn support_len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn get(&self, h: usize) -> f64 {
        self.probabilities.get(h).copied().unwrap_or(0.0)
    }
}

pub fn empirical_pmf(samples: &[u32]) -> Result<EmpiricalPmf> {
    let max = *samples.iter().max().ok_or(Error::EmptyInput("hoc samples"))?;
    let mut counts = vec![0u64; max as usize + 1];
    for &h in samples {
        counts[h as usize] += 1;
    }
    let n = samples.len() as f64;
    Ok(EmpiricalPmf {
        probabilities: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Poisson probability e^(−λ)·λ^h / h!, evaluated in log space.
pub fn poisson_pmf(lambda: f64, h: u64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    Ok((-lambda + h as f64 * lambda.ln() - ln_factorial(h)).exp())
}

/// Maximum-likelihood Poisson rate: the sample mean.
pub fn poisson_mle(samples: &[u32]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("hoc samples"));
    }
    let total: u64 = samples.iter().map(|&h| u64::from(h)).sum();
    Ok(total as f64 / samples.len() as f64)
}

/// Mean squared difference between an empirical PMF and Poisson(λ) over the
/// empirical support.
pub fn pmf_mse(empirical: &EmpiricalPmf, lambda: f64) -> Result<f64> {
    mean_squared_gap(empirical, |h| poisson_pmf(lambda, h as u64))
}

fn mean_squared_gap<F>(empirical: &EmpiricalPmf, model: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64>,
{
    let l = empirical.support_len();
    if l == 0 {
        return Err(Error::EmptyInput("pmf support"));
    }
    let mut acc = 0.0;
    for (h, &p) in empirical.probabilities().iter().enumerate() {
        acc += (p - model(h)?).powi(2);
    }
    Ok(acc / l as f64)
}

/// Total-variation distance between an empirical PMF and Poisson(λ).
pub fn total_variation(empirical: &EmpiricalPmf, lambda: f64) -> Result<f64> {
    let mut inside = 0.0;
    let mut model_mass = 0.0;
    for (h, &p) in empirical.probabilities().iter().enumerate() {
        let q = poisson_pmf(lambda, h as u64)?;
        inside += (p - q).abs();
        model_mass += q;
    }
    Ok(0.5 * (inside + (1.0 - model_mass).max(0.0)))
}

/// One scenario summarised for the power-law fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub lambda_gbs: f64,
    /// Flown distance v·T in km.
    pub distance_km: f64,
    pub lambda_hat: f64,
}

impl FitPoint {
    pub fn from_dataset(dataset: &HocDataset) -> Result<Self> {
        Ok(Self {
            lambda_gbs: dataset.key.lambda_gbs,
            distance_km: dataset.key.distance_km(),
            lambda_hat: poisson_mle(&dataset.hocs())?,
        })
    }
}

/// Builds fit points from datasets, setting aside scenarios whose mean HOC
/// (or flown distance) is zero since they carry no information in log space.
pub fn collect_fit_points(datasets: &[HocDataset]) -> Result<(Vec<FitPoint>, Vec<ScenarioKey>)> {
    let mut points = Vec::with_capacity(datasets.len());
    let mut skipped = Vec::new();
    for ds in datasets {
        let p = FitPoint::from_dataset(ds)?;
        if p.lambda_hat > 0.0 && p.distance_km > 0.0 {
            points.push(p);
        } else {
            skipped.push(ds.key);
        }
    }
    Ok((points, skipped))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub a: f64,
    pub b: f64,
    /// Sum of squared residuals of log(λ̂/d) against log a + b·log λ_GBS.
    pub residual: f64,
}

impl FitParams {
    /// Reference parameters for TTT = 160 ms and a 3 dB margin.
    pub const REFERENCE: FitParams = FitParams {
        a: 0.2417,
        b: 0.5278,
        residual: 0.0,
    };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) || !b.is_finite() {
            return Err(Error::invalid("fit", format!("need a > 0 and finite b, got ({a}, {b})")));
        }
        Ok(Self { a, b, residual: 0.0 })
    }

    /// Model rate λ for a density and a flown distance in km.
    pub fn rate(&self, lambda_gbs: f64, distance_km: f64) -> f64 {
        self.a * lambda_gbs.powf(self.b) * distance_km
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Ordinary least squares on log(λ̂/d).
    #[default]
    LogLinear,
    /// Log-linear start refined by Gauss–Newton on the linear-scale residuals.
    Refined,
}

pub fn power_fit(points: &[FitPoint]) -> Result<FitParams> {
    power_fit_with(points, FitMethod::LogLinear)
}

pub fn power_fit_with(points: &[FitPoint], method: FitMethod) -> Result<FitParams> {
    for (index, p) in points.iter().enumerate() {
        for (name, v) in [
            ("lambda_gbs", p.lambda_gbs),
            ("distance_km", p.distance_km),
            ("lambda_hat", p.lambda_hat),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidPoint {
                    index,
                    reason: format!("{name} must be > 0, got {v}"),
                });
            }
        }
    }
    let first = points.first().ok_or(Error::EmptyInput("fit points"))?;
    if points.iter().all(|p| p.lambda_gbs == first.lambda_gbs) {
        return Err(Error::Unidentifiable(
            "need at least two distinct GBS densities to separate a and b".into(),
        ));
    }

    let xs: Vec<f64> = points.iter().map(|p| p.lambda_gbs.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.lambda_hat / p.distance_km).ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let b = sxy / sxx;
    let log_a = y_mean - b * x_mean;
    let mut fit = FitParams {
        a: log_a.exp(),
        b,
        residual: 0.0,
    };
    if method == FitMethod::Refined {
        fit = gauss_newton(points, fit);
    }
    fit.residual = log_residual(points, &fit);
    Ok(fit)
}

fn log_residual(points: &[FitPoint], fit: &FitParams) -> f64 {
    points
        .iter()
        .map(|p| (p.lambda_hat.ln() - fit.rate(p.lambda_gbs, p.distance_km).ln()).powi(2))
        .sum()
}

fn linear_sse(points: &[FitPoint], a: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|p| (p.lambda_hat - a * p.lambda_gbs.powf(b) * p.distance_km).powi(2))
        .sum()
}

/// Damped Gauss–Newton on Σ(λ̂ − a·λ_GBS^b·d)² in (ln a, b).
fn gauss_newton(points: &[FitPoint], start: FitParams) -> FitParams {
    let (mut log_a, mut b) = (start.a.ln(), start.b);
    let mut sse = linear_sse(points, start.a, start.b);
    for _ in 0..50 {
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for p in points {
            let model = (log_a + b * p.lambda_gbs.ln()).exp() * p.distance_km;
            let r = p.lambda_hat - model;
            let j = [model, model * p.lambda_gbs.ln()];
            for i in 0..2 {
                jtr[i] += j[i] * r;
                for k in 0..2 {
                    jtj[i][k] += j[i] * j[k];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let step = [
            (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det,
            (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det,
        ];
        let mut scale = 1.0;
        let mut improved = false;
        while scale > 1e-6 {
            let (la, nb) = (log_a + scale * step[0], b + scale * step[1]);
            let trial = linear_sse(points, la.exp(), nb);
            if trial < sse {
                (log_a, b, improved) = (la, nb, true);
                let gain = sse - trial;
                sse = trial;
                if gain <= 1e-15 * sse.max(1e-300) {
                    improved = false;
                }
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    FitParams {
        a: log_a.exp(),
        b,
        residual: 0.0,
    }
}
