//! Site layouts, trajectory sampling and GBS-to-UAV link geometry.
//!
//! Conventions: positions are in meters, azimuths are measured
//! counter-clockwise from the +x axis in degrees, and zenith angles are
//! measured at the GBS antenna from straight up (0°) through the horizon
//! (90°) to straight down (180°).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::kmh_to_mps;

/// Number of sectors (cells) per site.
pub const SECTORS: usize = 3;

/// Angular separation of adjacent sector boresights.
pub const SECTOR_SPACING_DEG: f64 = 120.0;

const SQ_M_PER_SQ_KM: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Axis-aligned window in which the PPP is realised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub guard_margin: f64,
}

impl SimulationRegion {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || y_max <= y_min {
            return Err(Error::invalid(
                "region",
                format!("degenerate rectangle x:[{x_min}, {x_max}] y:[{y_min}, {y_max}]"),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            guard_margin: 0.0,
        })
    }

    /// Bounding box of the trajectory inflated by `guard_margin` on every side.
    pub fn around(trajectory: &Trajectory, guard_margin: f64) -> Result<Self> {
        ensure_positive("guard_margin", guard_margin)?;
        let a = trajectory.start;
        let b = trajectory.end();
        let mut region = Self::new(
            a.x.min(b.x) - guard_margin,
            a.x.max(b.x) + guard_margin,
            a.y.min(b.y) - guard_margin,
            a.y.max(b.y) + guard_margin,
        )?;
        region.guard_margin = guard_margin;
        Ok(region)
    }

    pub fn area_km2(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min) / SQ_M_PER_SQ_KM
    }

    pub fn contains(&self, p: Point2) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }
}

/// A three-sector ground base station.
#[derive(Debug, Clone, PartialEq)]
pub struct GbsSite {
    pub site_id: u32,
    pub position: Point2,
    /// Antenna height h_GBS in meters.
    pub height: f64,
    /// Sector boresight azimuths in degrees, 120° apart.
    pub sector_boresights: [f64; SECTORS],
}

impl GbsSite {
    /// Builds a site whose first sector points at `rotation_deg`.
    pub fn new(site_id: u32, position: Point2, height: f64, rotation_deg: f64) -> Self {
        let sector_boresights =
            std::array::from_fn(|s| rotation_deg + SECTOR_SPACING_DEG * s as f64);
        Self {
            site_id,
            position,
            height,
            sector_boresights,
        }
    }
}

/// Straight, constant-speed, constant-height flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start: Point2,
    pub heading_deg: f64,
    pub velocity_kmh: f64,
    pub height: f64,
    /// Measurement gap in seconds.
    pub gap: f64,
    /// Measurement window T in seconds.
    pub duration: f64,
}

impl Trajectory {
    pub fn new(
        start: Point2,
        heading_deg: f64,
        velocity_kmh: f64,
        height: f64,
        gap: f64,
        duration: f64,
    ) -> Result<Self> {
        if !(velocity_kmh.is_finite() && velocity_kmh >= 0.0) {
            return Err(Error::invalid("velocity", format!("must be >= 0, got {velocity_kmh}")));
        }
        if !(10.0..=300.0).contains(&height) {
            return Err(Error::invalid(
                "h_uav",
                format!("must lie in [10, 300] m, got {height}"),
            ));
        }
        ensure_positive("gap", gap)?;
        ensure_positive("duration", duration)?;
        if !heading_deg.is_finite() || !start.x.is_finite() || !start.y.is_finite() {
            return Err(Error::invalid("trajectory", "start and heading must be finite"));
        }
        Ok(Self {
            start,
            heading_deg,
            velocity_kmh,
            height,
            gap,
            duration,
        })
    }

    /// Flight from the origin along +x.
    pub fn along_x(velocity_kmh: f64, height: f64, gap: f64, duration: f64) -> Result<Self> {
        Self::new(Point2::default(), 0.0, velocity_kmh, height, gap, duration)
    }

    /// Distance flown between consecutive measurement instants, in meters.
    pub fn step_length(&self) -> f64 {
        kmh_to_mps(self.velocity_kmh) * self.gap
    }

    pub fn waypoint_count(&self) -> usize {
        // Absorb rounding in T/gap (e.g. 100/0.2) before flooring.
        (self.duration / self.gap + 1e-9).floor() as usize + 1
    }

    fn direction(&self) -> (f64, f64) {
        let (sin, cos) = self.heading_deg.to_radians().sin_cos();
        (cos, sin)
    }

    pub fn position_at(&self, index: usize) -> Point2 {
        let (cx, cy) = self.direction();
        let s = index as f64 * self.step_length();
        Point2::new(self.start.x + s * cx, self.start.y + s * cy)
    }

    pub fn end(&self) -> Point2 {
        self.position_at(self.waypoint_count() - 1)
    }

    pub fn waypoint(&self, index: usize) -> Waypoint {
        let p = self.position_at(index);
        Waypoint {
            index,
            time: index as f64 * self.gap,
            position: Point3 {
                x: p.x,
                y: p.y,
                z: self.height,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub index: usize,
    pub time: f64,
    pub position: Point3,
}

/// All measurement instants of a trajectory, `t = 0` included.
pub fn waypoints(trajectory: &Trajectory) -> Vec<Waypoint> {
    (0..trajectory.waypoint_count())
        .map(|i| trajectory.waypoint(i))
        .collect()
}

/// Samples a homogeneous PPP of sites with `intensity` sites per km².
///
/// Every site gets an independent sector rotation drawn uniformly from
/// [0°, 120°). Site ids are assigned in sampling order.
pub fn sample_ppp<R: Rng + ?Sized>(
    intensity: f64,
    site_height: f64,
    region: &SimulationRegion,
    rng: &mut R,
) -> Result<Vec<GbsSite>> {
    ensure_positive("intensity", intensity)?;
    ensure_positive("h_gbs", site_height)?;
    let mean = intensity * region.area_km2();
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid("intensity", e.to_string()))?
        .sample(rng) as usize;
    let sites = (0..count)
        .map(|i| {
            let x = rng.random_range(region.x_min..region.x_max);
            let y = rng.random_range(region.y_min..region.y_max);
            let rotation = rng.random_range(0.0..SECTOR_SPACING_DEG);
            GbsSite::new(i as u32, Point2::new(x, y), site_height, rotation)
        })
        .collect();
    Ok(sites)
}

/// Wraps an angle in degrees to (−180, 180].
pub fn wrap_degrees(angle: f64) -> f64 {
    let r = angle.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Sector-independent part of a link: distances and absolute angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteBearing {
    pub d2d: f64,
    pub d3d: f64,
    pub zenith_deg: f64,
    /// Absolute azimuth from the site toward the UAV.
    pub azimuth_deg: f64,
    /// cos(zenith), i.e. height difference over 3D distance.
    pub cos_zenith: f64,
}

impl SiteBearing {
    pub fn between(waypoint: &Waypoint, site: &GbsSite) -> Self {
        let dx = waypoint.position.x - site.position.x;
        let dy = waypoint.position.y - site.position.y;
        let dz = waypoint.position.z - site.height;
        let d2d = dx.hypot(dy);
        let d3d = d2d.hypot(dz);
        let cos_zenith = if d3d > 0.0 { dz / d3d } else { 1.0 };
        Self {
            d2d,
            d3d,
            zenith_deg: d2d.atan2(dz).to_degrees(),
            azimuth_deg: dy.atan2(dx).to_degrees(),
            cos_zenith,
        }
    }

    pub fn toward_sector(&self, boresight_deg: f64) -> LinkGeometry {
        LinkGeometry {
            d2d: self.d2d,
            d3d: self.d3d,
            zenith_deg: self.zenith_deg,
            azimuth_deg: wrap_degrees(self.azimuth_deg - boresight_deg),
        }
    }
}

/// Geometry of one sector-to-UAV link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d2d: f64,
    pub d3d: f64,
    /// Zenith angle θ in [0, 180] degrees; 90° is the horizon.
    pub zenith_deg: f64,
    /// Azimuth φ relative to the sector boresight, in (−180, 180].
    pub azimuth_deg: f64,
}

pub fn link_geometry(waypoint: &Waypoint, site: &GbsSite, sector_index: usize) -> LinkGeometry {
    SiteBearing::between(waypoint, site).toward_sector(site.sector_boresights[sector_index])
}
