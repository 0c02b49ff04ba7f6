//! File formats: per-scenario HOC datasets, the run manifest, and the CSV
//! exports consumed by plotting tools. All text is UTF-8 with LF endings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::campaign::{CampaignConfig, HocDataset, HocSample, ScenarioKey};
use crate::error::{Error, Result};
use crate::estimator::EstimatorReport;
use crate::handover::HandoverEvent;
use crate::statistics::{poisson_pmf, EmpiricalPmf};

pub const DATASET_HEADER: &str = "trial,seed,hoc";
pub const MANIFEST_FILE: &str = "manifest.json";

/// File name of a scenario's dataset, e.g. `hoc_v30_lam6_T100.csv`.
pub fn dataset_file_name(key: &ScenarioKey) -> String {
    format!(
        "hoc_v{}_lam{}_T{}.csv",
        key.velocity_kmh, key.lambda_gbs, key.t_window_s
    )
}

pub fn dataset_to_csv(dataset: &HocDataset) -> String {
    let mut out = String::with_capacity(24 * (dataset.samples.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for s in &dataset.samples {
        let _ = writeln!(out, "{},{},{}", s.trial_index, s.seed, s.hoc);
    }
    out
}

fn format_err(what: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        what: what.display().to_string(),
        reason: reason.into(),
    }
}

pub fn dataset_from_csv(text: &str, key: ScenarioKey, origin: &Path) -> Result<HocDataset> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == DATASET_HEADER => {}
        other => {
            return Err(format_err(
                origin,
                format!("line 1: expected header `{DATASET_HEADER}`, found {other:?}"),
            ))
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.trim().split(',').collect();
        let [trial, seed, hoc] = fields.as_slice() else {
            return Err(format_err(origin, format!("line {lineno}: expected 3 fields")));
        };
        let bad = |f: &str| format_err(origin, format!("line {lineno}: cannot parse `{f}`"));
        samples.push(HocSample {
            trial_index: trial.parse().map_err(|_| bad(trial))?,
            seed: seed.parse().map_err(|_| bad(seed))?,
            hoc: hoc.parse().map_err(|_| bad(hoc))?,
        });
    }
    Ok(HocDataset { key, samples })
}

pub fn write_dataset(dir: &Path, dataset: &HocDataset) -> Result<PathBuf> {
    let path = dir.join(dataset_file_name(&dataset.key));
    fs::write(&path, dataset_to_csv(dataset))?;
    Ok(path)
}

/// One manifest entry per dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub key: ScenarioKey,
    pub file: String,
    pub n_trials: usize,
}

/// Everything needed to regenerate a directory of datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created_unix_s: u64,
    pub elapsed_s: f64,
    /// Distance unit used by the power-law fit of these datasets.
    pub fit_distance_unit: String,
    pub config: CampaignConfig,
    pub datasets: Vec<DatasetEntry>,
}

impl RunManifest {
    pub fn new(config: CampaignConfig, datasets: &[HocDataset]) -> Self {
        let created_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix_s,
            elapsed_s: 0.0,
            fit_distance_unit: "km (v in km/h times T in hours)".to_string(),
            config,
            datasets: datasets
                .iter()
                .map(|d| DatasetEntry {
                    key: d.key,
                    file: dataset_file_name(&d.key),
                    n_trials: d.samples.len(),
                })
                .collect(),
        }
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| format_err(&path, e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| format_err(&path, e.to_string()))
}

/// Writes all datasets plus the manifest into `dir`.
pub fn write_run(dir: &Path, manifest: &RunManifest, datasets: &[HocDataset]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for ds in datasets {
        write_dataset(dir, ds)?;
    }
    write_manifest(dir, manifest)?;
    Ok(())
}

/// Loads every dataset listed in the manifest of `dir`.
pub fn read_run(dir: &Path) -> Result<(RunManifest, Vec<HocDataset>)> {
    let manifest = read_manifest(dir)?;
    let datasets = manifest
        .datasets
        .iter()
        .map(|e| {
            let path = dir.join(&e.file);
            let text = fs::read_to_string(&path)?;
            dataset_from_csv(&text, e.key, &path)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, datasets))
}

/// `h,empirical,poisson` over the empirical support.
pub fn pmf_csv(empirical: &EmpiricalPmf, lambda: f64) -> Result<String> {
    let mut out = String::from("h,empirical,poisson\n");
    for (h, &p) in empirical.probabilities().iter().enumerate() {
        let q = if lambda > 0.0 {
            poisson_pmf(lambda, h as u64)?
        } else if h == 0 {
            1.0
        } else {
            0.0
        };
        let _ = writeln!(out, "{h},{p},{q}");
    }
    Ok(out)
}

pub const ESTIMATOR_HEADER: &str = "v_true,lambda_gbs,T_s,n,mean_vhat,var_vhat,crlb,rmse";

pub fn estimator_csv(reports: &[EstimatorReport]) -> String {
    let mut out = format!("{ESTIMATOR_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.v_true, r.lambda_gbs, r.t_window_s, r.n, r.mean_vhat, r.var_vhat, r.crlb, r.rmse
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbRow {
    pub v_kmh: f64,
    pub lambda_gbs: f64,
    pub t_window_s: f64,
    pub sqrt_crlb: f64,
}

pub fn crlb_csv(rows: &[CrlbRow]) -> String {
    let mut out = String::from("v,lambda_gbs,T_s,sqrt_crlb\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.v_kmh, r.lambda_gbs, r.t_window_s, r.sqrt_crlb);
    }
    out
}

/// Handover timeline of one trial.
pub fn event_log_csv(events: &[HandoverEvent]) -> String {
    let mut out = String::from("time_s,from_site,from_sector,to_site,to_sector\n");
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.time_s, e.from.site_id, e.from.sector, e.to.site_id, e.to.sector
        );
    }
    out
}
