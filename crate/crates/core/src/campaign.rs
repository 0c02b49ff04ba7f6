//! Monte Carlo trials over a grid of (velocity, GBS density, window)
//! scenarios.
//!
//! A trial samples a fresh site layout, flies the UAV along +x from the
//! origin, measures every cell within the pruning radius at each
//! measurement instant and runs the handover state machine. All randomness
//! of a trial comes from ChaCha streams keyed by a seed derived from
//! `(master_seed, trial_index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{ArrayConfig, ArrayResponse, ElementPattern};
use crate::channel::{self, ChannelParams, PathLossModel, ShadowingProcess};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{
    sample_ppp, wrap_degrees, GbsSite, Point2, SimulationRegion, SiteBearing, Trajectory, SECTORS,
};
use crate::handover::{A3Config, CellId, HandoverEvent, HandoverState, Measurement, MeasurementSeries};
use crate::SECONDS_PER_HOUR;

/// Identifies a scenario: UAV velocity (km/h), GBS density (per km²) and
/// measurement window (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioKey {
    pub velocity_kmh: f64,
    pub lambda_gbs: f64,
    pub t_window_s: f64,
}

impl ScenarioKey {
    pub const fn new(velocity_kmh: f64, lambda_gbs: f64, t_window_s: f64) -> Self {
        Self {
            velocity_kmh,
            lambda_gbs,
            t_window_s,
        }
    }

    /// Flown distance v·T in km.
    pub fn distance_km(&self) -> f64 {
        self.velocity_kmh * self.t_window_s / SECONDS_PER_HOUR
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityParams {
    pub gap_s: f64,
    pub h_uav_m: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            gap_s: 0.2,
            h_uav_m: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub h_gbs_m: f64,
    /// Margin added around the trajectory bounding box for the PPP window.
    pub guard_margin_m: f64,
    /// Only sites within this horizontal distance of the UAV are measured.
    pub prune_radius_m: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            h_gbs_m: 35.0,
            guard_margin_m: 3000.0,
            prune_radius_m: 3000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandoverParams {
    pub hysteresis_db: f64,
    pub ttt_s: f64,
}

impl Default for HandoverParams {
    fn default() -> Self {
        Self {
            hysteresis_db: 3.0,
            ttt_s: 0.160,
        }
    }
}

/// Everything about a scenario except its key and trial budget.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub mobility: MobilityParams,
    pub network: NetworkParams,
    pub element: ElementPattern,
    pub array: ArrayConfig,
    pub channel: ChannelParams,
    pub handover: HandoverParams,
}

impl SimParams {
    pub fn a3(&self) -> A3Config {
        A3Config {
            hysteresis_db: self.handover.hysteresis_db,
            ttt_s: self.handover.ttt_s,
            gap_s: self.mobility.gap_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.mobility.h_uav_m;
        // The line-of-sight-only channel is valid from 40 m up to 300 m.
        if !(40.0..=300.0).contains(&h) {
            return Err(Error::invalid("h_uav_m", format!("must lie in [40, 300] m, got {h}")));
        }
        ensure_positive("gap_s", self.mobility.gap_s)?;
        ensure_positive("h_gbs_m", self.network.h_gbs_m)?;
        ensure_positive("guard_margin_m", self.network.guard_margin_m)?;
        ensure_positive("prune_radius_m", self.network.prune_radius_m)?;
        self.element.validate()?;
        self.array.validate()?;
        self.channel.validate()?;
        self.a3().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub key: ScenarioKey,
    pub params: SimParams,
    pub n_trials: u32,
    pub master_seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let k = &self.key;
        if !(k.velocity_kmh.is_finite() && k.velocity_kmh >= 0.0) {
            return Err(Error::invalid("velocity_kmh", format!("must be >= 0, got {}", k.velocity_kmh)));
        }
        ensure_positive("lambda_gbs", k.lambda_gbs)?;
        ensure_positive("t_window_s", k.t_window_s)?;
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be >= 1"));
        }
        self.params.validate()
    }
}

/// Cartesian product of the scenario axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub velocities_kmh: Vec<f64>,
    pub densities_per_km2: Vec<f64>,
    pub windows_s: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            velocities_kmh: vec![3.0, 30.0, 60.0, 120.0, 160.0],
            densities_per_km2: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            windows_s: vec![100.0],
        }
    }
}

/// A whole campaign as read from a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub master_seed: u64,
    pub n_trials: u32,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub mobility: MobilityParams,
    #[serde(default)]
    pub network: NetworkParams,
    #[serde(default)]
    pub element: ElementPattern,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub handover: HandoverParams,
}

impl CampaignConfig {
    /// The 5 × 5 grid at T = 100 s with the default link parameters.
    pub fn reference(master_seed: u64, n_trials: u32) -> Self {
        Self {
            master_seed,
            n_trials,
            grid: GridSpec::default(),
            mobility: MobilityParams::default(),
            network: NetworkParams::default(),
            element: ElementPattern::default(),
            array: ArrayConfig::default(),
            channel: ChannelParams::default(),
            handover: HandoverParams::default(),
        }
    }

    pub fn params(&self) -> SimParams {
        SimParams {
            mobility: self.mobility,
            network: self.network,
            element: self.element,
            array: self.array,
            channel: self.channel,
            handover: self.handover,
        }
    }

    /// Scenarios ordered by window, then density, then velocity.
    pub fn scenarios(&self) -> Result<Vec<ScenarioConfig>> {
        let g = &self.grid;
        if g.velocities_kmh.is_empty() || g.densities_per_km2.is_empty() || g.windows_s.is_empty() {
            return Err(Error::EmptyInput("scenario grid"));
        }
        let params = self.params();
        let mut out = Vec::new();
        for &t in &g.windows_s {
            for &lam in &g.densities_per_km2 {
                for &v in &g.velocities_kmh {
                    let sc = ScenarioConfig {
                        key: ScenarioKey::new(v, lam, t),
                        params,
                        n_trials: self.n_trials,
                        master_seed: self.master_seed,
                    };
                    sc.validate()?;
                    out.push(sc);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HocSample {
    pub trial_index: u32,
    pub hoc: u32,
    /// Seed from which every random stream of the trial is derived.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HocDataset {
    pub key: ScenarioKey,
    pub samples: Vec<HocSample>,
}

impl HocDataset {
    pub fn hocs(&self) -> Vec<u32> {
        self.samples.iter().map(|s| s.hoc).collect()
    }

    /// The first `n` trials, as if the scenario had been run with `n_trials = n`.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            key: self.key,
            samples: self.samples.iter().take(n).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub sample: HocSample,
    pub events: Vec<HandoverEvent>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial_index: u32) -> u64 {
    splitmix64(master_seed ^ splitmix64(u64::from(trial_index)))
}

const STREAM_LAYOUT: u64 = 0;
const STREAM_SHADOWING_BASE: u64 = 16;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn shadowing_stream(seed: u64, cell: CellId) -> ChaCha8Rng {
    let id = STREAM_SHADOWING_BASE + u64::from(cell.site_id) * SECTORS as u64 + u64::from(cell.sector);
    stream(seed, id)
}

/// Per-link budget terms with the constant parts precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinkBudget {
    pattern: ElementPattern,
    array: ArrayConfig,
    response: ArrayResponse,
    path_loss: PathLossModel,
    p_gbs_dbm: f64,
}

/// Sector-independent terms of one site at one waypoint.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SiteTerms {
    path_loss_db: f64,
    vertical_db: f64,
    /// Array factor when it does not depend on azimuth.
    shared_af_db: Option<f64>,
}

impl LinkBudget {
    pub(crate) fn new(params: &SimParams) -> Result<Self> {
        Ok(Self {
            pattern: params.element,
            array: params.array,
            response: ArrayResponse::new(&params.array),
            path_loss: PathLossModel::new(params.mobility.h_uav_m, params.channel.fc_ghz)?,
            p_gbs_dbm: params.channel.p_gbs_dbm,
        })
    }

    pub(crate) fn site_terms(&self, bearing: &SiteBearing) -> SiteTerms {
        let shared_af_db = self
            .array
            .is_azimuth_invariant()
            .then(|| self.response.factor_db_from(bearing.cos_zenith, 0.0));
        SiteTerms {
            // Co-located UAV and antenna only happens at d3d = 0; keep it finite.
            path_loss_db: self.path_loss.at(bearing.d3d.max(1e-3)),
            vertical_db: self.pattern.vertical_db(bearing.zenith_deg),
            shared_af_db,
        }
    }

    /// Sector gain A_E + AF toward the UAV.
    pub(crate) fn sector_gain(&self, bearing: &SiteBearing, terms: &SiteTerms, boresight_deg: f64) -> f64 {
        let phi = wrap_degrees(bearing.azimuth_deg - boresight_deg);
        let element = self.pattern.combine(self.pattern.horizontal_db(phi), terms.vertical_db);
        let af = match terms.shared_af_db {
            Some(af) => af,
            None => self.response.factor_db(bearing.zenith_deg, phi),
        };
        element + af
    }

    pub(crate) fn rsrp(&self, bearing: &SiteBearing, terms: &SiteTerms, boresight_deg: f64, sf_db: f64) -> f64 {
        channel::rsrp(
            self.p_gbs_dbm,
            self.sector_gain(bearing, terms, boresight_deg),
            terms.path_loss_db,
            sf_db,
        )
    }
}

struct CellShadow {
    process: ShadowingProcess<ChaCha8Rng>,
    last_index: usize,
}

struct SiteState {
    site: GbsSite,
    shadows: Option<[CellShadow; SECTORS]>,
}

/// Horizontal distance from `p` to the segment `a`–`b`.
fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let (abx, aby) = (b.x - a.x, b.y - a.y);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.x - (a.x + t * abx)).hypot(p.y - (a.y + t * aby))
}

/// Runs one trial, handing the measurements of every instant to `observe`.
fn simulate<F>(config: &ScenarioConfig, trial_index: u32, mut observe: F) -> Result<TrialOutcome>
where
    F: FnMut(f64, &[Measurement]),
{
    let params = &config.params;
    let key = config.key;
    let seed = trial_seed(config.master_seed, trial_index);
    let trajectory = Trajectory::along_x(
        key.velocity_kmh,
        params.mobility.h_uav_m,
        params.mobility.gap_s,
        key.t_window_s,
    )?;
    let region = SimulationRegion::around(&trajectory, params.network.guard_margin_m)?;
    let sites = sample_ppp(key.lambda_gbs, params.network.h_gbs_m, &region, &mut stream(seed, STREAM_LAYOUT))?;

    let radius = params.network.prune_radius_m;
    let (start, end) = (trajectory.start, trajectory.end());
    let mut states: Vec<SiteState> = sites
        .into_iter()
        .filter(|s| distance_to_segment(s.position, start, end) <= radius)
        .map(|site| SiteState { site, shadows: None })
        .collect();

    let budget = LinkBudget::new(params)?;
    let sigma = params.channel.shadowing_sigma(params.mobility.h_uav_m)?;
    let rho_step = channel::step_correlation(
        trajectory.step_length(),
        params.channel.beta,
        params.channel.x_c_m,
    );
    let a3 = params.a3();
    let radius2 = radius * radius;

    let mut measurements: Vec<Measurement> = Vec::with_capacity(3 * states.len());
    let mut ho: Option<HandoverState> = None;
    let mut events = Vec::new();

    for index in 0..trajectory.waypoint_count() {
        let wp = trajectory.waypoint(index);
        let serving = ho.as_ref().map(HandoverState::serving);
        measurements.clear();

        for st in states.iter_mut() {
            let dx = wp.position.x - st.site.position.x;
            let dy = wp.position.y - st.site.position.y;
            let in_range = dx * dx + dy * dy <= radius2;
            let serving_sector = serving
                .filter(|c| c.site_id == st.site.site_id)
                .map(|c| c.sector as usize);
            if !in_range && serving_sector.is_none() {
                continue;
            }
            let bearing = SiteBearing::between(&wp, &st.site);
            let terms = budget.site_terms(&bearing);
            let site_id = st.site.site_id;
            let shadows = st.shadows.get_or_insert_with(|| {
                std::array::from_fn(|s| {
                    let cell = CellId::new(site_id, s as u8);
                    CellShadow {
                        process: ShadowingProcess::new(sigma, rho_step, shadowing_stream(seed, cell)),
                        last_index: index,
                    }
                })
            });
            for (s, shadow) in shadows.iter_mut().enumerate() {
                if !in_range && serving_sector != Some(s) {
                    continue;
                }
                let sf = shadow.process.advance_by(index - shadow.last_index);
                shadow.last_index = index;
                let rsrp = budget.rsrp(&bearing, &terms, st.site.sector_boresights[s], sf);
                measurements.push(Measurement::new(CellId::new(site_id, s as u8), rsrp));
            }
        }

        observe(wp.time, &measurements);
        match ho.as_mut() {
            Some(state) => {
                if let Some(ev) = state.step(wp.time, &measurements, &a3) {
                    events.push(ev);
                }
            }
            // No cell in range yet: attach as soon as one appears.
            None if !measurements.is_empty() => ho = Some(HandoverState::attach(&measurements)?),
            None => {}
        }
    }

    Ok(TrialOutcome {
        sample: HocSample {
            trial_index,
            hoc: events.len() as u32,
            seed,
        },
        events,
    })
}

/// One trial with its handover timeline.
pub fn run_trial_detailed(config: &ScenarioConfig, trial_index: u32) -> Result<TrialOutcome> {
    config.validate()?;
    simulate(config, trial_index, |_, _| {})
}

pub fn run_trial(config: &ScenarioConfig, trial_index: u32) -> Result<HocSample> {
    run_trial_detailed(config, trial_index).map(|o| o.sample)
}

/// One trial together with every measurement instant, for inspection.
pub fn run_trial_trace(
    config: &ScenarioConfig,
    trial_index: u32,
) -> Result<(TrialOutcome, MeasurementSeries)> {
    config.validate()?;
    let mut trace = Vec::new();
    let outcome = simulate(config, trial_index, |t, m| trace.push((t, m.to_vec())))?;
    Ok((outcome, trace))
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<HocDataset> {
    run_campaign(std::slice::from_ref(config)).map(|mut v| v.remove(0))
}

/// Runs every trial of every scenario on the current rayon pool.
pub fn run_campaign(grid: &[ScenarioConfig]) -> Result<Vec<HocDataset>> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("scenario grid"));
    }
    for sc in grid {
        sc.validate()?;
    }
    let jobs: Vec<(usize, u32)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, sc)| (0..sc.n_trials).map(move |t| (i, t)))
        .collect();
    let samples: Vec<HocSample> = jobs
        .par_iter()
        .map(|&(i, t)| simulate(&grid[i], t, |_, _| {}).map(|o| o.sample))
        .collect::<Result<_>>()?;

    let mut rest = samples.as_slice();
    Ok(grid
        .iter()
        .map(|sc| {
            let (head, tail) = rest.split_at(sc.n_trials as usize);
            rest = tail;
            HocDataset {
                key: sc.key,
                samples: head.to_vec(),
            }
        })
        .collect())
}

/// Like [`run_campaign`] on a dedicated pool of `workers` threads.
pub fn run_campaign_with_workers(grid: &[ScenarioConfig], workers: usize) -> Result<Vec<HocDataset>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    pool.install(|| run_campaign(grid))
}
