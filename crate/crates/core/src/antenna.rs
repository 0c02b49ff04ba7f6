//! Sector antenna gain: single-element pattern plus the array factor of a
//! uniformly fed, electronically steered planar array.
//!
//! Angles are in degrees. θ is the zenith angle at the GBS (90° is the
//! horizon), φ the azimuth relative to the sector boresight.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;

/// Lower clamp for the array factor at perfect nulls.
pub const AF_FLOOR_DB: f64 = -250.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementPattern {
    pub phi_3db_deg: f64,
    pub theta_3db_deg: f64,
    /// Front-to-back ratio A_m.
    pub a_m_db: f64,
    /// Vertical side-lobe level limit SLA_V.
    pub sla_v_db: f64,
    pub g_max_dbi: f64,
}

impl Default for ElementPattern {
    fn default() -> Self {
        Self {
            phi_3db_deg: 65.0,
            theta_3db_deg: 65.0,
            a_m_db: 30.0,
            sla_v_db: 30.0,
            g_max_dbi: 8.0,
        }
    }
}

impl ElementPattern {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("phi_3db_deg", self.phi_3db_deg),
            ("theta_3db_deg", self.theta_3db_deg),
            ("a_m_db", self.a_m_db),
            ("sla_v_db", self.sla_v_db),
            ("g_max_dbi", self.g_max_dbi),
        ];
        for (name, v) in fields {
            crate::error::ensure_positive(name, v)?;
        }
        Ok(())
    }

    /// Horizontal cut A_E,H(φ), always ≤ 0.
    pub fn horizontal_db(&self, phi_deg: f64) -> f64 {
        -(12.0 * (phi_deg / self.phi_3db_deg).powi(2)).min(self.a_m_db)
    }

    /// Vertical cut A_E,V(θ), always ≤ 0.
    pub fn vertical_db(&self, theta_deg: f64) -> f64 {
        -(12.0 * ((theta_deg - 90.0) / self.theta_3db_deg).powi(2)).min(self.sla_v_db)
    }

    /// Combines the two cuts into the 3D element gain.
    pub fn combine(&self, horizontal_db: f64, vertical_db: f64) -> f64 {
        self.g_max_dbi - (-(horizontal_db + vertical_db)).min(self.a_m_db)
    }
}

/// Which reference the downtilt angle is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltReference {
    /// Steer at zenith angle 90° + θ_D, i.e. θ_D below the horizon.
    #[default]
    BelowHorizon,
    /// Steer at zenith angle θ_D, taking the cosine term literally.
    Zenith,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    /// Vertical elements m_V.
    pub m_v: usize,
    /// Horizontal elements m_H.
    pub m_h: usize,
    /// Vertical spacing ΔV in wavelengths.
    pub spacing_v: f64,
    /// Horizontal spacing ΔH in wavelengths.
    pub spacing_h: f64,
    pub downtilt_deg: f64,
    /// Horizontal steering φ_D relative to boresight.
    pub steer_azimuth_deg: f64,
    /// Correlation coefficient ρ.
    pub rho: f64,
    pub tilt_reference: TiltReference,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            m_v: 8,
            m_h: 1,
            spacing_v: 0.5,
            spacing_h: 0.5,
            downtilt_deg: 6.0,
            steer_azimuth_deg: 0.0,
            rho: 1.0,
            tilt_reference: TiltReference::BelowHorizon,
        }
    }
}

impl ArrayConfig {
    pub fn elements(&self) -> usize {
        self.m_v * self.m_h
    }

    pub fn steering_zenith_deg(&self) -> f64 {
        match self.tilt_reference {
            TiltReference::BelowHorizon => 90.0 + self.downtilt_deg,
            TiltReference::Zenith => self.downtilt_deg,
        }
    }

    /// With a single column the array factor does not depend on φ.
    pub fn is_azimuth_invariant(&self) -> bool {
        self.m_h == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements() == 0 {
            return Err(Error::invalid("array", "needs at least one element"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", format!("must lie in [0, 1], got {}", self.rho)));
        }
        let finite = [self.spacing_v, self.spacing_h, self.downtilt_deg, self.steer_azimuth_deg];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("array", "spacings and steering angles must be finite"));
        }
        Ok(())
    }
}

/// |Σ_{k<n} e^{ikx}|², via the Dirichlet kernel sin²(nx/2) / sin²(x/2).
fn dirichlet_power(n: usize, x: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let half = 0.5 * x;
    let den = half.sin();
    if den.abs() < 1e-12 {
        return (n * n) as f64;
    }
    let num = (n as f64 * half).sin();
    (num / den).powi(2)
}

/// Array factor evaluator with the steering terms precomputed.
#[derive(Debug, Clone, Copy)]
pub struct ArrayResponse {
    m_v: usize,
    m_h: usize,
    inv_n: f64,
    rho: f64,
    /// 2π·ΔV/λ and 2π·ΔH/λ.
    k_v: f64,
    k_h: f64,
    cos_steer: f64,
    sin_steer_sin_az: f64,
}

impl ArrayResponse {
    pub fn new(cfg: &ArrayConfig) -> Self {
        let steer = cfg.steering_zenith_deg().to_radians();
        Self {
            m_v: cfg.m_v,
            m_h: cfg.m_h,
            inv_n: 1.0 / cfg.elements() as f64,
            rho: cfg.rho,
            k_v: 2.0 * PI * cfg.spacing_v,
            k_h: 2.0 * PI * cfg.spacing_h,
            cos_steer: steer.cos(),
            sin_steer_sin_az: steer.sin() * cfg.steer_azimuth_deg.to_radians().sin(),
        }
    }

    pub fn factor_db(&self, theta_deg: f64, phi_deg: f64) -> f64 {
        let (sin_t, cos_t) = theta_deg.to_radians().sin_cos();
        let sin_t_sin_p = if self.m_h == 1 {
            0.0
        } else {
            sin_t * phi_deg.to_radians().sin()
        };
        self.factor_db_from(cos_t, sin_t_sin_p)
    }

    /// Array factor given cos θ and sin θ·sin φ directly.
    pub fn factor_db_from(&self, cos_theta: f64, sin_theta_sin_phi: f64) -> f64 {
        let psi_v = cos_theta - self.cos_steer;
        let mut power = dirichlet_power(self.m_v, self.k_v * psi_v);
        if self.m_h > 1 {
            let psi_h = sin_theta_sin_phi - self.sin_steer_sin_az;
            power *= dirichlet_power(self.m_h, self.k_h * psi_h);
        }
        // |a·wᵀ|² with uniform amplitudes 1/√n
        let coherent = power * self.inv_n;
        let arg = (1.0 - self.rho) + self.rho * coherent;
        if arg > 0.0 {
            (10.0 * arg.log10()).max(AF_FLOOR_DB)
        } else {
            AF_FLOOR_DB
        }
    }
}

/// 3D element gain A_E(θ, φ) in dBi.
pub fn element_gain(theta_deg: f64, phi_deg: f64, pattern: &ElementPattern) -> f64 {
    pattern.combine(pattern.horizontal_db(phi_deg), pattern.vertical_db(theta_deg))
}

/// Array factor AF(θ, φ, n) in dB.
pub fn array_factor(theta_deg: f64, phi_deg: f64, cfg: &ArrayConfig) -> f64 {
    ArrayResponse::new(cfg).factor_db(theta_deg, phi_deg)
}

/// Sector gain A_A = A_E + AF along a link.
pub fn sector_gain(geom: &LinkGeometry, pattern: &ElementPattern, cfg: &ArrayConfig) -> f64 {
    element_gain(geom.zenith_deg, geom.azimuth_deg, pattern)
        + array_factor(geom.zenith_deg, geom.azimuth_deg, cfg)
}
