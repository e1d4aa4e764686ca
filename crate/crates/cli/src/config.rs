use std::path::PathBuf;

use clap::{Parser, Subcommand};
use polybounds_core::bounds::Corner;
use polybounds_core::{SearchOptions, Tolerances};

use crate::error::{CliError, CliResult};

pub const TOL_ENV: &str = "POLYBOUNDS_TOL";
/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "polybounds",
    version,
    about = "Bulk and shear bounds for planar polycrystals and the laminates attaining them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Crystal JSON (keys C1111 C1122 C1112 C2222 C2212 C1212), or a construction file for `verify`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// JSON report path (stdout when omitted).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Corners to construct, e.g. `A` or `A,C` (default: all four).
    #[arg(long, global = true, value_delimiter = ',')]
    pub corner: Vec<String>,
    /// Weights for the trajectory sweep, e.g. `0.49,2`.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub alpha1: Vec<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub zi_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub zi_max: Option<f64>,
    /// Coverage grid points per axis.
    #[arg(long, global = true, default_value_t = 100)]
    pub grid: usize,
    /// Coverage radius.
    #[arg(
        long,
        global = true,
        default_value_t = 0.02,
        allow_negative_numbers = true
    )]
    pub epsilon: f64,
    /// Number of zI values in the sweep.
    #[arg(long, global = true, default_value_t = 3000)]
    pub zi_count: usize,
    /// Samples per tail in the sweep.
    #[arg(long, global = true, default_value_t = 400)]
    pub points_per_tail: usize,
    /// Family members written to the CSV and SVG.
    #[arg(long, global = true, default_value_t = 60)]
    pub plot_members: usize,
    /// Boundary-search rays for the shear bounds.
    #[arg(long, global = true, default_value_t = 720)]
    pub rays: usize,
    /// Global tolerance; overrides POLYBOUNDS_TOL.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Bulk and shear bound rectangle of a crystal.
    Bounds,
    /// Laminates attaining the selected corners.
    Attain,
    /// Small-angle trajectory sweep with CSV and SVG output.
    Trajectories,
    /// Re-checks a construction file written by `attain`.
    Verify,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha1: Vec<f64>,
    pub zi_range: Option<(f64, f64)>,
    pub grid: usize,
    pub epsilon: f64,
    pub zi_count: usize,
    pub points_per_tail: usize,
    pub plot_members: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub corners: Vec<Corner>,
    pub sweep: SweepConfig,
    pub search: SearchOptions,
    pub tol: Tolerances,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive_tol(value: f64, source: &str) -> CliResult<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(config(format!(
            "{source} must be a positive number, got {value}"
        )))
    }
}

impl RunConfig {
    /// Validates the parsed flags. `env_tol` is the raw value of `POLYBOUNDS_TOL`.
    pub fn from_cli(cli: Cli, env_tol: Option<String>) -> CliResult<RunConfig> {
        let global = match (cli.tol, env_tol) {
            (Some(t), _) => Some(positive_tol(t, "--tol")?),
            (None, Some(raw)) => {
                let t = raw
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| config(format!("{TOL_ENV}={raw:?} is not a number")))?;
                Some(positive_tol(t, TOL_ENV)?)
            }
            (None, None) => None,
        };
        let tol = global.map(Tolerances::with_global).unwrap_or_default();

        let corners = if cli.corner.is_empty() {
            Corner::ALL.to_vec()
        } else {
            let mut out = Vec::new();
            for raw in &cli.corner {
                let c: Corner = raw
                    .parse()
                    .map_err(|_| config(format!("--corner expects A, B, C or D, got {raw:?}")))?;
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out
        };

        if cli.grid < MIN_RESOLUTION {
            return Err(config(format!(
                "--grid must be at least {MIN_RESOLUTION}, got {}",
                cli.grid
            )));
        }
        if cli.points_per_tail < MIN_RESOLUTION {
            return Err(config(format!(
                "--points-per-tail must be at least {MIN_RESOLUTION}, got {}",
                cli.points_per_tail
            )));
        }
        if cli.rays < MIN_RESOLUTION {
            return Err(config(format!(
                "--rays must be at least {MIN_RESOLUTION}, got {}",
                cli.rays
            )));
        }
        if cli.zi_count == 0 || cli.plot_members == 0 {
            return Err(config("--zi-count and --plot-members must be positive"));
        }
        if !(cli.epsilon.is_finite() && cli.epsilon > 0.0) {
            return Err(config(format!(
                "--epsilon must be positive, got {}",
                cli.epsilon
            )));
        }
        if let Some(a) = cli.alpha1.iter().find(|a| !a.is_finite()) {
            return Err(config(format!("--alpha1 values must be finite, got {a}")));
        }
        let zi_range = match (cli.zi_min, cli.zi_max) {
            (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
            (Some(lo), Some(hi)) => {
                return Err(config(format!("--zi-min {lo} must be below --zi-max {hi}")))
            }
            (None, None) => None,
            _ => return Err(config("--zi-min and --zi-max go together")),
        };

        match cli.command {
            Command::Bounds | Command::Attain | Command::Verify if cli.input.is_none() => {
                return Err(config("--input is required for this command"));
            }
            Command::Trajectories if cli.input.is_none() && cli.alpha1.is_empty() => {
                return Err(config(
                    "trajectories needs --alpha1 or a crystal via --input",
                ));
            }
            _ => {}
        }

        Ok(RunConfig {
            command: cli.command,
            input: cli.input,
            output: cli.output,
            corners,
            sweep: SweepConfig {
                alpha1: cli.alpha1,
                zi_range,
                grid: cli.grid,
                epsilon: cli.epsilon,
                zi_count: cli.zi_count,
                points_per_tail: cli.points_per_tail,
                plot_members: cli.plot_members,
            },
            search: SearchOptions { rays: cli.rays },
            tol,
            csv: cli.csv,
            svg: cli.svg,
        })
    }
}
