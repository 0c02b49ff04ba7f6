use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use uav_hoc::campaign::{run_campaign, run_campaign_with_workers, run_trial_detailed, CampaignConfig, HocDataset, ScenarioKey};
use uav_hoc::estimator::{crlb, estimate_velocity, evaluate, rate_coefficient};
use uav_hoc::persist::{
    crlb_csv, dataset_file_name, estimator_csv, event_log_csv, pmf_csv, read_run, write_run, CrlbRow, RunManifest,
};
use uav_hoc::statistics::{
    collect_fit_points, empirical_pmf, pmf_mse, poisson_mle, power_fit_with, FitMethod, FitParams,
};

use crate::error::{CliError, CliResult};

/// Reads a campaign from TOML, or from the `config` field of a run manifest
/// when the file ends in `.json`.
pub fn load_config(path: &Path) -> CliResult<CampaignConfig> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let config_err = |reason: String| CliError::Config {
        path: path.to_path_buf(),
        reason,
    };
    let config = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str::<RunManifest>(&text)
            .map_err(|e| config_err(e.to_string()))?
            .config
    } else {
        toml::from_str::<CampaignConfig>(&text).map_err(|e| config_err(e.to_string()))?
    };
    Ok(config)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(CliError::io(path))
}

fn scenario_tag(key: &ScenarioKey) -> String {
    dataset_file_name(key)
        .trim_start_matches("hoc_")
        .trim_end_matches(".csv")
        .to_string()
}

pub fn simulate(config_path: &Path, out_dir: &Path, workers: Option<usize>, event_log: u32) -> CliResult<()> {
    let config = load_config(config_path)?;
    let grid = config.scenarios()?;
    let started = Instant::now();
    let datasets = match workers {
        Some(n) => run_campaign_with_workers(&grid, n)?,
        None => run_campaign(&grid)?,
    };
    let mut manifest = RunManifest::new(config, &datasets);
    manifest.elapsed_s = started.elapsed().as_secs_f64();
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    write_run(out_dir, &manifest, &datasets)?;

    if event_log > 0 {
        let events_dir = out_dir.join("events");
        fs::create_dir_all(&events_dir).map_err(CliError::io(&events_dir))?;
        for sc in &grid {
            for trial in 0..event_log.min(sc.n_trials) {
                let outcome = run_trial_detailed(sc, trial)?;
                let name = format!("events_{}_trial{trial}.csv", scenario_tag(&sc.key));
                write_text(&events_dir.join(name), &event_log_csv(&outcome.events))?;
            }
        }
    }
    eprintln!(
        "wrote {} datasets to {} in {:.1} s",
        datasets.len(),
        out_dir.display(),
        manifest.elapsed_s
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScenarioFit {
    velocity_kmh: f64,
    lambda_gbs: f64,
    t_window_s: f64,
    n_trials: usize,
    lambda_hat: f64,
    fitted_lambda: f64,
    pmf_mse: f64,
}

#[derive(Debug, Serialize)]
struct FitReport {
    method: &'static str,
    distance_unit: &'static str,
    a: f64,
    b: f64,
    residual: f64,
    scenarios: Vec<ScenarioFit>,
    excluded: Vec<ScenarioKey>,
}

fn fit_datasets(datasets: &[HocDataset], method: FitMethod) -> CliResult<(FitParams, Vec<ScenarioKey>)> {
    let (points, skipped) = collect_fit_points(datasets)?;
    for key in &skipped {
        eprintln!(
            "warning: scenario v = {} km/h, λ_GBS = {}, T = {} s has zero mean HOC and is left out of the fit",
            key.velocity_kmh, key.lambda_gbs, key.t_window_s
        );
    }
    Ok((power_fit_with(&points, method)?, skipped))
}

pub fn fit(dataset_dir: &Path, out_path: &Path, refine: bool, pmf_dir: Option<PathBuf>) -> CliResult<()> {
    let (_, datasets) = read_run(dataset_dir)?;
    let method = if refine { FitMethod::Refined } else { FitMethod::LogLinear };
    let (params, excluded) = fit_datasets(&datasets, method)?;

    let pmf_dir = pmf_dir.unwrap_or_else(|| out_path.parent().unwrap_or(Path::new(".")).join("pmf"));
    fs::create_dir_all(&pmf_dir).map_err(CliError::io(&pmf_dir))?;
    let mut scenarios = Vec::with_capacity(datasets.len());
    for ds in &datasets {
        let hocs = ds.hocs();
        let lambda_hat = poisson_mle(&hocs)?;
        let emp = empirical_pmf(&hocs)?;
        let name = format!("pmf_{}.csv", scenario_tag(&ds.key));
        write_text(&pmf_dir.join(name), &pmf_csv(&emp, lambda_hat)?)?;
        scenarios.push(ScenarioFit {
            velocity_kmh: ds.key.velocity_kmh,
            lambda_gbs: ds.key.lambda_gbs,
            t_window_s: ds.key.t_window_s,
            n_trials: hocs.len(),
            lambda_hat,
            fitted_lambda: params.rate(ds.key.lambda_gbs, ds.key.distance_km()),
            pmf_mse: pmf_mse(&emp, lambda_hat)?,
        });
    }

    let report = FitReport {
        method: if refine { "refined" } else { "log-linear" },
        distance_unit: "km",
        a: params.a,
        b: params.b,
        residual: params.residual,
        scenarios,
        excluded,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    write_text(out_path, &text)?;
    println!("a = {:.6}, b = {:.6}, residual = {:.6}", params.a, params.b, params.residual);
    Ok(())
}

pub fn fit_params(a: f64, b: f64) -> CliResult<FitParams> {
    Ok(FitParams::new(a, b)?)
}

pub fn estimate(hoc: u32, lambda_gbs: f64, t_seconds: f64, params: &FitParams) -> CliResult<()> {
    let k = rate_coefficient(params, lambda_gbs, t_seconds)?;
    let v_hat = estimate_velocity(hoc, k);
    let sqrt_crlb = if v_hat > 0.0 { crlb(v_hat, k)?.sqrt() } else { 0.0 };
    println!("v_hat_kmh = {v_hat:.4}");
    println!("sqrt_crlb_kmh = {sqrt_crlb:.4}");
    Ok(())
}

pub fn crlb_table(
    velocities: &[f64],
    densities: &[f64],
    windows: &[f64],
    params: &FitParams,
    out: Option<&Path>,
) -> CliResult<()> {
    let mut rows = Vec::with_capacity(velocities.len() * densities.len() * windows.len());
    for &t in windows {
        for &lam in densities {
            let k = rate_coefficient(params, lam, t)?;
            for &v in velocities {
                rows.push(CrlbRow {
                    v_kmh: v,
                    lambda_gbs: lam,
                    t_window_s: t,
                    sqrt_crlb: crlb(v, k)?.sqrt(),
                });
            }
        }
    }
    let csv = crlb_csv(&rows);
    match out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn evaluate_datasets(dataset_dir: &Path, out_path: &Path, params: Option<FitParams>) -> CliResult<()> {
    let (_, datasets) = read_run(dataset_dir)?;
    let params = match params {
        Some(p) => p,
        None => fit_datasets(&datasets, FitMethod::LogLinear)?.0,
    };
    let reports = datasets
        .iter()
        .filter(|ds| ds.key.velocity_kmh > 0.0)
        .map(|ds| evaluate(ds, &params))
        .collect::<uav_hoc::Result<Vec<_>>>()?;
    write_text(out_path, &estimator_csv(&reports))
}
