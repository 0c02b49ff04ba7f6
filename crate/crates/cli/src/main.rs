mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uav_hoc::statistics::FitParams;

use crate::error::{CliError, CliResult};

/// Handover-count statistics and velocity estimation for cellular-connected UAVs.
#[derive(Debug, Parser)]
#[command(name = "uav-hoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Power-law parameters of the expected handover count.
#[derive(Debug, Args)]
struct PowerLaw {
    #[arg(long, default_value_t = FitParams::REFERENCE.a)]
    a: f64,
    #[arg(long, default_value_t = FitParams::REFERENCE.b)]
    b: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write one HOC dataset per scenario.
    Simulate {
        /// TOML campaign config, or a manifest.json from an earlier run.
        config: PathBuf,
        out_dir: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Also write handover timelines of the first N trials per scenario.
        #[arg(long, value_name = "N", default_value_t = 0)]
        event_log: u32,
    },
    /// Fit the power law to a directory of datasets and export PMFs.
    Fit {
        dataset_dir: PathBuf,
        /// JSON fit report.
        out_path: PathBuf,
        /// Refine the log-space solution by Gauss–Newton in linear space.
        #[arg(long)]
        refine: bool,
        /// Where to write PMF CSVs (default: `pmf/` next to the report).
        #[arg(long)]
        pmf_dir: Option<PathBuf>,
    },
    /// Estimate the velocity from one handover count.
    Estimate {
        #[arg(long)]
        hoc: u32,
        #[arg(long)]
        lambda_gbs: f64,
        #[arg(long)]
        t_seconds: f64,
        #[command(flatten)]
        power_law: PowerLaw,
    },
    /// Tabulate √CRLB over a grid of velocities, densities and windows.
    Crlb {
        #[arg(long, value_delimiter = ',', default_value = "3,30,60,68,120,160")]
        velocities: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
        densities: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "100,500")]
        windows: Vec<f64>,
        #[command(flatten)]
        power_law: PowerLaw,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the estimator to every dataset and compare with the true velocity.
    Evaluate {
        dataset_dir: PathBuf,
        out_path: PathBuf,
        /// Use these parameters instead of fitting the datasets themselves.
        #[arg(long, requires = "b")]
        a: Option<f64>,
        #[arg(long, requires = "a")]
        b: Option<f64>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            out_dir,
            workers,
            event_log,
        } => {
            if workers == Some(0) {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            commands::simulate(&config, &out_dir, workers, event_log)
        }
        Command::Fit {
            dataset_dir,
            out_path,
            refine,
            pmf_dir,
        } => commands::fit(&dataset_dir, &out_path, refine, pmf_dir),
        Command::Estimate {
            hoc,
            lambda_gbs,
            t_seconds,
            power_law,
        } => commands::estimate(hoc, lambda_gbs, t_seconds, &commands::fit_params(power_law.a, power_law.b)?),
        Command::Crlb {
            velocities,
            densities,
            windows,
            power_law,
            out,
        } => commands::crlb_table(
            &velocities,
            &densities,
            &windows,
            &commands::fit_params(power_law.a, power_law.b)?,
            out.as_deref(),
        ),
        Command::Evaluate {
            dataset_dir,
            out_path,
            a,
            b,
        } => {
            let params = match (a, b) {
                (Some(a), Some(b)) => Some(commands::fit_params(a, b)?),
                _ => None,
            };
            commands::evaluate_datasets(&dataset_dir, &out_path, params)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
