use std::path::Path;
use std::time::Instant;

use residence_core::baseline::{xcorr_estimate, XcorrConfig};
use residence_core::select::{
    corr_coeff, mean_residence_time, select_lambda, snr_db, sweep, Strategy,
};
use residence_core::solver::{run_am as solve_am, DeconvResult, StopReason};
use residence_core::{Kernel, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::commands::read_pair;
use crate::commands::sweep::write_sweep_table;
use crate::error::{invalid, Result};
use crate::io::{read_kernel, write_json, write_kernel, write_series};
use crate::settings::Settings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub method: String,
    pub strategy: Option<Strategy>,
    pub kernel_length: usize,
    pub series_length: usize,
    pub c_est: f64,
    pub chosen_lambda: Option<f64>,
    #[serde(with = "residence_core::float_serde::option")]
    pub y_rec_snr_db: Option<f64>,
    pub corr_coeff: Option<f64>,
    pub tau: Option<f64>,
    #[serde(with = "residence_core::float_serde::option", default)]
    pub k_snr_db: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub runtime_seconds: f64,
}

impl EstimateSummary {
    fn new(
        method: &str,
        strategy: Option<Strategy>,
        chosen_lambda: Option<f64>,
        y: &TimeSeries,
        k_true: Option<&Kernel>,
        result: &DeconvResult,
        runtime_seconds: f64,
    ) -> Result<Self> {
        let k_snr_db = match k_true {
            Some(k) => Some(snr_db(k.values(), result.k_est.values())?),
            None => None,
        };
        Ok(Self {
            method: method.into(),
            strategy,
            kernel_length: result.k_est.len(),
            series_length: y.len(),
            c_est: result.c_est,
            chosen_lambda,
            y_rec_snr_db: snr_db(y.as_slice(), result.y_rec.as_slice()).ok(),
            corr_coeff: corr_coeff(y.as_slice(), result.y_rec.as_slice()).ok(),
            tau: mean_residence_time(&result.k_est).ok(),
            k_snr_db,
            converged: result.converged,
            iterations: result.outer_iterations,
            stop_reason: result.stop_reason,
            runtime_seconds,
        })
    }
}

fn load_truth(settings: &Settings, kernel_len: usize) -> Result<Option<Kernel>> {
    let Some(path) = &settings.k_true else {
        return Ok(None);
    };
    let k = read_kernel(path)?;
    if k.len() != kernel_len {
        return invalid(format!(
            "{}: ground-truth kernel has {} lags but --kernel-length is {kernel_len}",
            path.display(),
            k.len()
        ));
    }
    Ok(Some(k))
}

fn write_outputs(out_dir: &Path, result: &DeconvResult, summary: &EstimateSummary) -> Result<()> {
    write_kernel(&out_dir.join("k_est.csv"), &result.k_est)?;
    write_series(&out_dir.join("y_rec.csv"), result.y_rec.as_slice())?;
    write_json(&out_dir.join("summary.json"), summary)
}

/// Single solve at a fixed lambda, or a sweep followed by a strategy.
pub fn estimate(
    settings: &Settings,
) -> Result<(
    DeconvResult,
    EstimateSummary,
    Option<residence_core::select::SweepReport>,
)> {
    let (x, y) = read_pair(settings)?;
    let kernel_len = settings.require_kernel_length()?;
    let truth = load_truth(settings, kernel_len)?;
    let config = settings.solver_config();
    let start = Instant::now();
    match (settings.lambda, settings.strategy) {
        (Some(_), Some(_)) => invalid("give either --lambda or --strategy, not both"),
        (None, None) => invalid("one of --lambda or --strategy is required"),
        (Some(lambda), None) => {
            let result = solve_am(
                &x,
                &y,
                kernel_len,
                &residence_core::SolverConfig { lambda, ..config },
            )?;
            let summary = EstimateSummary::new(
                "am",
                None,
                Some(lambda),
                &y,
                truth.as_ref(),
                &result,
                start.elapsed().as_secs_f64(),
            )?;
            Ok((result, summary, None))
        }
        (None, Some(strategy)) => {
            match strategy {
                Strategy::Oracle if truth.is_none() => {
                    return invalid("oracle strategy requires a ground-truth kernel (--k-true)")
                }
                Strategy::Discrepancy if settings.noise_variance.is_none() => {
                    return invalid("discrepancy strategy requires --noise-variance")
                }
                _ => {}
            }
            let grid = settings.grid_or_default()?;
            let report = sweep(
                &x,
                &y,
                kernel_len,
                &grid,
                &config,
                truth.as_ref(),
                settings.noise_variance,
            )?;
            let chosen = select_lambda(&report, strategy, settings.noise_variance)?;
            let summary = EstimateSummary::new(
                "am",
                Some(strategy),
                Some(chosen.chosen_lambda),
                &y,
                truth.as_ref(),
                &chosen.chosen_result,
                start.elapsed().as_secs_f64(),
            )?;
            Ok((chosen.chosen_result, summary, Some(report)))
        }
    }
}

pub fn run_am(settings: &Settings, out_dir: &Path) -> Result<String> {
    let (result, summary, report) = estimate(settings)?;
    if let Some(report) = &report {
        write_sweep_table(&out_dir.join("sweep.csv"), report)?;
    }
    write_outputs(out_dir, &result, &summary)?;
    Ok(format!(
        "lambda {:e}, c_est {:.6}, {} iterations ({:?}); outputs in {}",
        summary.chosen_lambda.unwrap_or(f64::NAN),
        summary.c_est,
        summary.iterations,
        summary.stop_reason,
        out_dir.display()
    ))
}

pub fn xcorr(settings: &Settings) -> Result<(DeconvResult, EstimateSummary)> {
    let (x, y) = read_pair(settings)?;
    let kernel_len = settings.require_kernel_length()?;
    let truth = load_truth(settings, kernel_len)?;
    let start = Instant::now();
    let result = xcorr_estimate(&x, &y, &XcorrConfig::new(kernel_len))?;
    let summary = EstimateSummary::new(
        "xcorr",
        None,
        None,
        &y,
        truth.as_ref(),
        &result,
        start.elapsed().as_secs_f64(),
    )?;
    Ok((result, summary))
}

pub fn run_xcorr(settings: &Settings, out_dir: &Path) -> Result<String> {
    let (result, summary) = xcorr(settings)?;
    write_outputs(out_dir, &result, &summary)?;
    Ok(format!(
        "cross-correlation estimate written to {}",
        out_dir.display()
    ))
}
