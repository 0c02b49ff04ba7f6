//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use uav_hoc::antenna::ArrayConfig;

/// Linear array power from a direct phasor sum over every element.
pub fn phasor_sum_power(theta_deg: f64, phi_deg: f64, cfg: &ArrayConfig) -> f64 {
    let n = cfg.elements() as f64;
    let (theta, phi) = (theta_deg.to_radians(), phi_deg.to_radians());
    let steer = cfg.steering_zenith_deg().to_radians();
    let steer_az = cfg.steer_azimuth_deg.to_radians();
    let psi_v = theta.cos() - steer.cos();
    let psi_h = theta.sin() * phi.sin() - steer.sin() * steer_az.sin();
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..cfg.m_v {
        for r in 0..cfg.m_h {
            let phase = 2.0
                * std::f64::consts::PI
                * (p as f64 * cfg.spacing_v * psi_v + r as f64 * cfg.spacing_h * psi_h);
            sum += Complex64::from_polar(1.0 / n.sqrt(), phase);
        }
    }
    (1.0 - cfg.rho) + cfg.rho * sum.norm_sqr()
}

/// σ²·β^(|i−j|·Δ/X_c) for `n` equally spaced points.
pub fn exponential_covariance(n: usize, delta: f64, sigma: f64, beta: f64, x_c: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| sigma * sigma * beta.powf((i as f64 - j as f64).abs() * delta / x_c))
                .collect()
        })
        .collect()
}

/// Plain Cholesky–Banachiewicz factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}
