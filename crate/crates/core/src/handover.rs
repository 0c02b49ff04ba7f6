//! A3-event handover with hysteresis and time-to-trigger (TTT).
//!
//! At every measurement instant the strongest non-serving cell is the only
//! candidate target. A trigger is armed the first time it beats the serving
//! cell by more than the hysteresis, re-armed when the candidate changes,
//! cleared when the condition fails, and executed at the first instant at
//! least TTT after arming at which the condition still holds.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// One sector of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub site_id: u32,
    pub sector: u8,
}

impl CellId {
    pub const fn new(site_id: u32, sector: u8) -> Self {
        Self { site_id, sector }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub cell: CellId,
    pub rsrp_dbm: f64,
}

impl Measurement {
    pub const fn new(cell: CellId, rsrp_dbm: f64) -> Self {
        Self { cell, rsrp_dbm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A3Config {
    /// Handover margin m_hyst in dB.
    pub hysteresis_db: f64,
    /// Time-to-trigger in seconds.
    pub ttt_s: f64,
    /// Measurement gap in seconds.
    pub gap_s: f64,
}

impl Default for A3Config {
    fn default() -> Self {
        Self {
            hysteresis_db: 3.0,
            ttt_s: 0.160,
            gap_s: 0.200,
        }
    }
}

impl A3Config {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("hysteresis_db", self.hysteresis_db)?;
        ensure_positive("ttt_s", self.ttt_s)?;
        ensure_positive("gap_s", self.gap_s)
    }
}

// Measurement instants are k·gap; elapsed-time comparisons get a small slack
// so that a TTT equal to a multiple of the gap is not lost to rounding.
const TIME_SLACK_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingTrigger {
    pub target: CellId,
    pub since_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverEvent {
    pub time_s: f64,
    pub from: CellId,
    pub to: CellId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverState {
    serving: CellId,
    pending: Option<PendingTrigger>,
    hoc: u32,
}

/// Cell with the highest RSRP; ties go to the smallest `CellId`.
pub fn strongest_cell(measurements: &[Measurement]) -> Result<CellId> {
    strongest_excluding(measurements, None)
        .map(|m| m.cell)
        .ok_or(Error::EmptyInput("measurements"))
}

fn strongest_excluding(measurements: &[Measurement], exclude: Option<CellId>) -> Option<Measurement> {
    let mut best: Option<Measurement> = None;
    for m in measurements {
        if Some(m.cell) == exclude {
            continue;
        }
        best = match best {
            None => Some(*m),
            Some(b) if m.rsrp_dbm > b.rsrp_dbm || (m.rsrp_dbm == b.rsrp_dbm && m.cell < b.cell) => {
                Some(*m)
            }
            keep => keep,
        };
    }
    best
}

impl HandoverState {
    /// Starts served by `serving` with no pending trigger.
    pub fn new(serving: CellId) -> Self {
        Self {
            serving,
            pending: None,
            hoc: 0,
        }
    }

    /// Initial attachment to the strongest measured cell.
    pub fn attach(measurements: &[Measurement]) -> Result<Self> {
        strongest_cell(measurements).map(Self::new)
    }

    pub fn serving(&self) -> CellId {
        self.serving
    }

    pub fn pending(&self) -> Option<PendingTrigger> {
        self.pending
    }

    /// Handovers executed so far.
    pub fn hoc(&self) -> u32 {
        self.hoc
    }

    /// Processes the measurements taken at time `t_s`.
    ///
    /// A serving cell missing from `measurements` is treated as −∞ dBm.
    pub fn step(
        &mut self,
        t_s: f64,
        measurements: &[Measurement],
        cfg: &A3Config,
    ) -> Option<HandoverEvent> {
        let serving_rsrp = measurements
            .iter()
            .find(|m| m.cell == self.serving)
            .map_or(f64::NEG_INFINITY, |m| m.rsrp_dbm);

        let candidate = strongest_excluding(measurements, Some(self.serving))
            .filter(|m| m.rsrp_dbm > serving_rsrp + cfg.hysteresis_db);

        let Some(target) = candidate.map(|m| m.cell) else {
            self.pending = None;
            return None;
        };

        match self.pending {
            Some(p) if p.target == target => {
                if t_s - p.since_s + TIME_SLACK_S >= cfg.ttt_s {
                    let event = HandoverEvent {
                        time_s: t_s,
                        from: self.serving,
                        to: target,
                    };
                    self.serving = target;
                    self.pending = None;
                    self.hoc += 1;
                    return Some(event);
                }
            }
            _ => {
                self.pending = Some(PendingTrigger {
                    target,
                    since_s: t_s,
                });
            }
        }
        None
    }
}

/// Measurement instants `(time_s, measurements)` in time order.
pub type MeasurementSeries = Vec<(f64, Vec<Measurement>)>;

/// Replays a time-ordered measurement series and returns every executed
/// handover. The first entry is the attachment instant.
pub fn handover_timeline(
    series: &[(f64, Vec<Measurement>)],
    cfg: &A3Config,
) -> Result<Vec<HandoverEvent>> {
    let ((_, first), rest) = series.split_first().ok_or(Error::EmptyInput("rsrp series"))?;
    let mut state = HandoverState::attach(first)?;
    Ok(rest
        .iter()
        .filter_map(|(t, m)| state.step(*t, m, cfg))
        .collect())
}

/// Number of handovers executed in (0, T] over a measurement series.
pub fn count_handovers(series: &[(f64, Vec<Measurement>)], cfg: &A3Config) -> Result<u32> {
    handover_timeline(series, cfg).map(|events| events.len() as u32)
}
