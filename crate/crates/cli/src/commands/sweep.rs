use std::path::Path;

use residence_core::select::{select_lambda, sweep, Strategy, StrategySelection, SweepReport};
use serde::Serialize;

use crate::commands::read_pair;
use crate::error::{CliError, Result};
use crate::io::{fmt_f64, read_kernel, write_json, write_table};
use crate::settings::Settings;

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_table(path: &Path, report: &SweepReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| match &e.outcome {
            Ok(s) => vec![
                fmt_f64(e.lambda),
                "ok".into(),
                opt(s.k_snr_db),
                opt(s.y_rec_snr_db),
                opt(s.y_corr_coeff),
                fmt_f64(s.residual_variance),
                fmt_f64(s.result.c_est),
                s.result.outer_iterations.to_string(),
                s.result.converged.to_string(),
            ],
            Err(msg) => {
                let mut row = vec![fmt_f64(e.lambda), format!("failed: {msg}")];
                row.resize(9, String::new());
                row
            }
        })
        .collect();
    write_table(
        path,
        &[
            "lambda",
            "status",
            "k_snr_db",
            "y_rec_snr_db",
            "y_corr_coeff",
            "residual_variance",
            "c_est",
            "iterations",
            "converged",
        ],
        &rows,
    )
}

#[derive(Serialize)]
struct Selection {
    strategy: Strategy,
    chosen_lambda: f64,
    #[serde(with = "residence_core::float_serde")]
    criterion_value: f64,
}

impl From<&StrategySelection> for Selection {
    fn from(s: &StrategySelection) -> Self {
        Self {
            strategy: s.strategy,
            chosen_lambda: s.chosen_lambda,
            criterion_value: s.criterion_value,
        }
    }
}

pub fn run(settings: &Settings, out_dir: &Path) -> Result<String> {
    let (x, y) = read_pair(settings)?;
    let kernel_len = settings.require_kernel_length()?;
    let truth = match &settings.k_true {
        Some(p) => Some(read_kernel(p)?),
        None => None,
    };
    let grid = settings.grid_or_default()?;
    let report = sweep(
        &x,
        &y,
        kernel_len,
        &grid,
        &settings.solver_config(),
        truth.as_ref(),
        settings.noise_variance,
    )?;
    write_sweep_table(&out_dir.join("sweep.csv"), &report)?;
    write_json(&out_dir.join("report.json"), &report)?;
    // strategies whose prerequisites are missing are left out
    let selections: Vec<Selection> = Strategy::ALL
        .iter()
        .filter_map(|&s| select_lambda(&report, s, None).ok())
        .map(|s| Selection::from(&s))
        .collect();
    write_json(&out_dir.join("selections.json"), &selections)?;
    let failed = report.failures();
    if failed > 0 {
        return Err(CliError::TooManyFailures {
            failed,
            total: report.entries.len(),
        });
    }
    Ok(format!(
        "{} lambda values swept into {}",
        report.entries.len(),
        out_dir.display()
    ))
}
