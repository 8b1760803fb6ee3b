//! Run settings shared by the command line and JSON config files.
//!
//! Every flag has a config-file twin with the same name in snake_case; a flag
//! given on the command line overrides the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use residence_core::select::{LambdaGrid, Strategy};
use residence_core::solver::SolverConfig;
use residence_core::synth::NoiseReference;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, Result};

/// Environment variable holding the default output root.
pub const OUT_ROOT_ENV: &str = "RESIDENCE_OUT";

/// A lambda grid as written on the command line: `min,max,count`, or one of
/// the presets `synthetic` and `field`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GridSpec {
    Synthetic,
    Field,
    LogSpaced { min: f64, max: f64, count: usize },
}

impl GridSpec {
    pub fn build(&self) -> Result<LambdaGrid> {
        Ok(match *self {
            GridSpec::Synthetic => LambdaGrid::synthetic_default(),
            GridSpec::Field => LambdaGrid::field_default(),
            GridSpec::LogSpaced { min, max, count } => LambdaGrid::log_spaced(min, max, count)?,
        })
    }
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "synthetic" => return Ok(GridSpec::Synthetic),
            "field" => return Ok(GridSpec::Field),
            _ => {}
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || {
            CliError::Invalid(format!(
                "grid must be `min,max,count`, `synthetic` or `field`, got {s:?}"
            ))
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].parse().map_err(|_| bad())?;
        let max: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        let spec = GridSpec::LogSpaced { min, max, count };
        spec.build()?;
        Ok(spec)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Synthetic => f.write_str("synthetic"),
            GridSpec::Field => f.write_str("field"),
            GridSpec::LogSpaced { min, max, count } => write!(f, "{min:e},{max:e},{count}"),
        }
    }
}

impl TryFrom<String> for GridSpec {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> Self {
        g.to_string()
    }
}

fn parse_float(s: &str) -> std::result::Result<f64, String> {
    residence_core::float_serde::parse(s).ok_or_else(|| format!("invalid number {s:?}"))
}

fn parse_noise_reference(s: &str) -> std::result::Result<NoiseReference, String> {
    match s.to_ascii_lowercase().as_str() {
        "response" => Ok(NoiseReference::Response),
        "output" => Ok(NoiseReference::Output),
        _ => Err(format!("expected `response` or `output`, got {s:?}")),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Input (rainfall) series, CSV `t,value`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_x: Option<PathBuf>,
    /// Output (aquifer level) series, CSV `t,value`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_y: Option<PathBuf>,
    /// Ground-truth kernel, CSV `lag,value` (enables the oracle strategy).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_true: Option<PathBuf>,
    /// Two-sided kernel length K (even); lags run from -K/2 to K/2 - 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_length: Option<usize>,
    /// Fixed smoothness weight.
    #[arg(long, value_parser = parse_float)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Lambda selection strategy: oracle, discrepancy, fidelity or corr.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    /// Lambda grid: `min,max,count`, `synthetic` or `field`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Noise variance for the discrepancy strategy.
    #[arg(long, value_parser = parse_float)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
    /// Input SNR in dB (`inf` for noise-free).
    #[arg(long, value_parser = parse_float, allow_hyphen_values = true)]
    #[serde(
        with = "residence_core::float_serde::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub snr_db: Option<f64>,
    /// Benchmark input SNR levels in dB, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_float, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// Random seed for simulation and benchmarks.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Benchmark trials per level.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Benchmark series lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
    /// Simulated series length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Simulated base level c.
    #[arg(long, value_parser = parse_float, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Multifractal H.
    #[arg(long, value_parser = parse_float, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Multifractal C1.
    #[arg(long, value_parser = parse_float)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    /// Multifractal alpha.
    #[arg(long, value_parser = parse_float)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Signal the input SNR refers to: `response` (x * k) or `output` (x * k + c).
    #[arg(long, value_parser = parse_noise_reference)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_reference: Option<NoiseReference>,
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Solver tolerances (config file only).
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),* $(,)?) => {
        Settings { $($field: $top.$field.or($base.$field),)* }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(
            self,
            base,
            input_x,
            input_y,
            k_true,
            kernel_length,
            lambda,
            strategy,
            grid,
            noise_variance,
            snr_db,
            levels,
            seed,
            trials,
            lengths,
            length,
            offset,
            h,
            c1,
            alpha,
            noise_reference,
            out,
            solver,
        )
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver.unwrap_or_default()
    }

    /// `--out`, else `$RESIDENCE_OUT/<command>`, else `residence-out/<command>`.
    pub fn out_dir(&self, command: &str) -> PathBuf {
        if let Some(out) = &self.out {
            return out.clone();
        }
        let root = std::env::var_os(OUT_ROOT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("residence-out"));
        root.join(command)
    }

    pub fn require_kernel_length(&self) -> Result<usize> {
        match self.kernel_length {
            Some(k) if k >= 2 && k % 2 == 0 => Ok(k),
            Some(k) => invalid(format!("--kernel-length must be even and >= 2, got {k}")),
            None => invalid("--kernel-length is required"),
        }
    }

    pub fn require_path<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Invalid(format!("--{flag} is required")))
    }

    pub fn grid_or_default(&self) -> Result<LambdaGrid> {
        self.grid.unwrap_or(GridSpec::Synthetic).build()
    }
}
