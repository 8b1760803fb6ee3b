//! Monte-Carlo benchmark: for every series length, input SNR level and
//! trial, a fresh scenario is solved over the lambda grid, every selection
//! strategy is applied and the cross-correlation baseline is run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use residence_core::baseline::{xcorr_estimate, XcorrConfig};
use residence_core::select::{
    corr_coeff, select_lambda, snr_db, sweep, LambdaGrid, Strategy, SweepReport,
};
use residence_core::solver::SolverConfig;
use residence_core::synth::{
    derive_seed, generate_scenario_with, KernelSpec, MultifractalParams, NoiseReference,
};
use serde::{Deserialize, Serialize};

use crate::commands::simulate::{multifractal_params, DEFAULT_OFFSET};
use crate::error::{invalid, CliError, Result};
use crate::io::{fmt_f64, write_json, write_table};
use crate::settings::Settings;

/// Share of failed computations above which the run is reported as failed.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub input_snr_levels_db: Vec<f64>,
    pub trials_per_level: usize,
    pub series_lengths: Vec<usize>,
    pub kernel_support: usize,
    pub grid: LambdaGrid,
    pub methods: Vec<Method>,
    pub params: MultifractalParams,
    pub c_true: f64,
    pub noise_reference: NoiseReference,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            input_snr_levels_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials_per_level: 30,
            series_lengths: vec![1000, 5000],
            kernel_support: 500,
            grid: LambdaGrid::synthetic_default(),
            methods: Method::ALL.to_vec(),
            params: MultifractalParams::default(),
            c_true: DEFAULT_OFFSET,
            noise_reference: NoiseReference::Response,
            solver: SolverConfig::default(),
            seed: 0,
        }
    }
}

impl BenchSpec {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let d = Self::default();
        let kernel_support = match settings.kernel_length {
            Some(k) if k >= 4 && k % 2 == 0 => k / 2,
            Some(k) => return invalid(format!("--kernel-length must be even and >= 4, got {k}")),
            None => d.kernel_support,
        };
        let spec = Self {
            input_snr_levels_db: settings.levels.clone().unwrap_or(d.input_snr_levels_db),
            trials_per_level: settings.trials.unwrap_or(d.trials_per_level),
            series_lengths: settings.lengths.clone().unwrap_or(d.series_lengths),
            kernel_support,
            grid: match settings.grid {
                Some(g) => g.build()?,
                None => d.grid,
            },
            methods: d.methods,
            params: multifractal_params(settings),
            c_true: settings.offset.unwrap_or(d.c_true),
            noise_reference: settings.noise_reference.unwrap_or(d.noise_reference),
            solver: settings.solver_config(),
            seed: settings.seed.unwrap_or(d.seed),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials_per_level == 0 {
            return invalid("trials must be >= 1");
        }
        if self.input_snr_levels_db.is_empty() {
            return invalid("at least one SNR level is required");
        }
        if self
            .input_snr_levels_db
            .iter()
            .any(|v| v.is_nan() || *v == f64::NEG_INFINITY)
        {
            return invalid("SNR levels must be finite or +inf");
        }
        if self.series_lengths.is_empty() || self.series_lengths.contains(&0) {
            return invalid("series lengths must be positive");
        }
        if self.methods.is_empty() {
            return invalid("at least one method is required");
        }
        self.params.validate()?;
        self.solver.validate()?;
        Ok(())
    }

    pub fn kernel_length(&self) -> usize {
        2 * self.kernel_support
    }

    /// Seed of one trial; independent of the other levels and lengths.
    pub fn trial_seed(&self, length: usize, level_index: usize, trial: usize) -> u64 {
        derive_seed(
            derive_seed(derive_seed(self.seed, length as u64), level_index as u64),
            trial as u64,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Am(Strategy),
    Xcorr,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Am(Strategy::Oracle),
        Method::Am(Strategy::Discrepancy),
        Method::Am(Strategy::Fidelity),
        Method::Am(Strategy::CorrCoeff),
        Method::Xcorr,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Am(s) => write!(f, "am_{}", s.name()),
            Method::Xcorr => f.write_str("xcorr"),
        }
    }
}

/// Outcome of one method on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub length: usize,
    pub snr_db: f64,
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub chosen_lambda: Option<f64>,
    pub k_snr_db: Option<f64>,
    pub y_rec_snr_db: Option<f64>,
    pub corr_coeff: Option<f64>,
    /// Every accepted kernel was causal and nonnegative.
    pub feasible: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub length: usize,
    pub snr_db: f64,
    pub trial: usize,
    pub sweep_seconds: f64,
    pub xcorr_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResults {
    pub spec: BenchSpec,
    pub records: Vec<TrialRecord>,
    pub timings: Vec<TrialTiming>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            count: values.len(),
            mean,
            sd,
        })
    }
}

impl BenchResults {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    /// Successful `k_snr_db` values of one method at one (length, level).
    pub fn k_snr_values(&self, length: usize, snr_db: f64, method: Method) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.length == length && r.snr_db == snr_db && r.method == method)
            .filter_map(|r| r.k_snr_db)
            .collect()
    }

    pub fn k_snr_stats(&self, length: usize, snr_db: f64, method: Method) -> Option<Stats> {
        Stats::of(&self.k_snr_values(length, snr_db, method))
    }
}

fn failed_record(base: &TrialRecord, method: Method, msg: String) -> TrialRecord {
    TrialRecord {
        method,
        error: Some(msg),
        ..base.clone()
    }
}

fn run_trial(
    spec: &BenchSpec,
    length: usize,
    level_index: usize,
    trial: usize,
) -> (Vec<TrialRecord>, TrialTiming) {
    let snr = spec.input_snr_levels_db[level_index];
    let seed = spec.trial_seed(length, level_index, trial);
    let base = TrialRecord {
        length,
        snr_db: snr,
        trial,
        seed,
        method: Method::Xcorr,
        chosen_lambda: None,
        k_snr_db: None,
        y_rec_snr_db: None,
        corr_coeff: None,
        feasible: true,
        error: None,
    };
    let mut timing = TrialTiming {
        length,
        snr_db: snr,
        trial,
        sweep_seconds: 0.0,
        xcorr_seconds: 0.0,
    };
    let kernel = KernelSpec::with_support(spec.kernel_support);
    let scenario = match generate_scenario_with(
        &spec.params,
        &kernel,
        length,
        spec.c_true,
        snr,
        spec.noise_reference,
        seed,
    ) {
        Ok(s) => s,
        Err(e) => {
            let msg = format!("scenario generation failed: {e}");
            let records = spec
                .methods
                .iter()
                .map(|&m| failed_record(&base, m, msg.clone()))
                .collect();
            return (records, timing);
        }
    };
    let (x, y, k_true) = (&scenario.x, &scenario.y_noisy, &scenario.k_true);

    let wants_am = spec.methods.iter().any(|m| matches!(m, Method::Am(_)));
    let report: Option<std::result::Result<SweepReport, String>> = wants_am.then(|| {
        let start = Instant::now();
        let r = sweep(
            x,
            y,
            spec.kernel_length(),
            &spec.grid,
            &spec.solver,
            Some(k_true),
            Some(scenario.noise_variance),
        )
        .map_err(|e| e.to_string());
        timing.sweep_seconds = start.elapsed().as_secs_f64();
        r
    });

    let records = spec
        .methods
        .iter()
        .map(|&method| {
            let outcome = match method {
                Method::Am(strategy) => match report.as_ref().expect("sweep ran") {
                    Err(e) => Err(e.clone()),
                    Ok(report) => {
                        let feasible =
                            report.entries.iter().filter_map(|e| e.solve()).all(|s| {
                                s.result.k_est.is_causal() && s.result.k_est.is_nonnegative()
                            });
                        select_lambda(report, strategy, None)
                            .map(|sel| (Some(sel.chosen_lambda), sel.chosen_result, feasible))
                            .map_err(|e| e.to_string())
                    }
                },
                Method::Xcorr => {
                    let start = Instant::now();
                    let r = xcorr_estimate(x, y, &XcorrConfig::new(spec.kernel_length()))
                        .map(|r| (None, r, true))
                        .map_err(|e| e.to_string());
                    timing.xcorr_seconds = start.elapsed().as_secs_f64();
                    r
                }
            };
            match outcome {
                Err(msg) => failed_record(&base, method, msg),
                Ok((chosen_lambda, result, feasible)) => TrialRecord {
                    method,
                    chosen_lambda,
                    k_snr_db: snr_db(k_true.values(), result.k_est.values()).ok(),
                    y_rec_snr_db: snr_db(y.as_slice(), result.y_rec.as_slice()).ok(),
                    corr_coeff: corr_coeff(y.as_slice(), result.y_rec.as_slice()).ok(),
                    feasible,
                    ..base.clone()
                },
            }
        })
        .collect();
    (records, timing)
}

/// Runs every trial (in parallel); records come back in a fixed order.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchResults> {
    spec.validate()?;
    let jobs: Vec<(usize, usize, usize)> = spec
        .series_lengths
        .iter()
        .flat_map(|&len| {
            (0..spec.input_snr_levels_db.len())
                .flat_map(move |lvl| (0..spec.trials_per_level).map(move |t| (len, lvl, t)))
        })
        .collect();
    let outcomes: Vec<(Vec<TrialRecord>, TrialTiming)> = jobs
        .par_iter()
        .map(|&(len, lvl, t)| run_trial(spec, len, lvl, t))
        .collect();
    let mut records = Vec::new();
    let mut timings = Vec::new();
    for (r, t) in outcomes {
        records.extend(r);
        timings.push(t);
    }
    for r in records.iter().filter(|r| r.error.is_some()) {
        log::warn!(
            "length {} level {} trial {} {}: {}",
            r.length,
            r.snr_db,
            r.trial,
            r.method,
            r.error.as_deref().unwrap_or_default()
        );
    }
    Ok(BenchResults {
        spec: spec.clone(),
        records,
        timings,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn stats_cells(s: Option<Stats>) -> [String; 2] {
    match s {
        Some(s) => [fmt_f64(s.mean), fmt_f64(s.sd)],
        None => [String::new(), String::new()],
    }
}

/// Writes the raw table, the aggregate tables and (separately, since it is
/// not reproducible) the timing table.
pub fn write_results(results: &BenchResults, out_dir: &Path) -> Result<()> {
    let spec = &results.spec;
    write_json(&out_dir.join("bench_spec.json"), spec)?;

    let raw: Vec<Vec<String>> = results
        .records
        .iter()
        .map(|r| {
            vec![
                r.length.to_string(),
                fmt_f64(r.snr_db),
                r.trial.to_string(),
                r.seed.to_string(),
                r.method.to_string(),
                opt(r.chosen_lambda),
                opt(r.k_snr_db),
                opt(r.y_rec_snr_db),
                opt(r.corr_coeff),
                r.error
                    .as_ref()
                    .map_or_else(|| "ok".to_string(), |e| format!("failed: {e}")),
            ]
        })
        .collect();
    write_table(
        &out_dir.join("trials.csv"),
        &[
            "length",
            "snr_db",
            "trial",
            "seed",
            "method",
            "chosen_lambda",
            "k_snr_db",
            "y_rec_snr_db",
            "corr_coeff",
            "status",
        ],
        &raw,
    )?;

    let mut aggregate = Vec::new();
    let mut by_length: BTreeMap<(u64, String), Vec<Vec<String>>> = BTreeMap::new();
    let mut lambdas = Vec::new();
    for &len in &spec.series_lengths {
        for &level in &spec.input_snr_levels_db {
            for &method in &spec.methods {
                let stats = results.k_snr_stats(len, level, method);
                let attempted = results
                    .records
                    .iter()
                    .filter(|r| r.length == len && r.snr_db == level && r.method == method)
                    .count();
                let [mean, sd] = stats_cells(stats);
                aggregate.push(vec![
                    len.to_string(),
                    fmt_f64(level),
                    method.to_string(),
                    stats.map_or(0, |s| s.count).to_string(),
                    (attempted - stats.map_or(0, |s| s.count)).to_string(),
                    mean.clone(),
                    sd.clone(),
                ]);
                by_length
                    .entry((level.to_bits(), method.to_string()))
                    .or_default()
                    .push(vec![
                        fmt_f64(level),
                        method.to_string(),
                        len.to_string(),
                        mean,
                        sd,
                    ]);

                if let Method::Am(strategy) = method {
                    let logs: Vec<f64> = results
                        .records
                        .iter()
                        .filter(|r| r.length == len && r.snr_db == level && r.method == method)
                        .filter_map(|r| r.chosen_lambda.map(f64::log10))
                        .collect();
                    let [mean, sd] = stats_cells(Stats::of(&logs));
                    lambdas.push(vec![
                        len.to_string(),
                        fmt_f64(level),
                        strategy.name().to_string(),
                        mean,
                        sd,
                    ]);
                }
            }
        }
    }
    write_table(
        &out_dir.join("aggregate.csv"),
        &[
            "length",
            "snr_db",
            "method",
            "trials",
            "failures",
            "mean_k_snr_db",
            "sd_k_snr_db",
        ],
        &aggregate,
    )?;
    write_table(
        &out_dir.join("chosen_lambda.csv"),
        &[
            "length",
            "snr_db",
            "strategy",
            "mean_log10_lambda",
            "sd_log10_lambda",
        ],
        &lambdas,
    )?;
    // grouped per (level, method) so each group reads as a curve over length
    let mut length_rows = Vec::new();
    for &level in &spec.input_snr_levels_db {
        for &method in &spec.methods {
            if let Some(rows) = by_length.remove(&(level.to_bits(), method.to_string())) {
                length_rows.extend(rows);
            }
        }
    }
    write_table(
        &out_dir.join("k_snr_vs_length.csv"),
        &["snr_db", "method", "length", "mean_k_snr_db", "sd_k_snr_db"],
        &length_rows,
    )?;

    let timing: Vec<Vec<String>> = results
        .timings
        .iter()
        .map(|t| {
            vec![
                t.length.to_string(),
                fmt_f64(t.snr_db),
                t.trial.to_string(),
                format!("{:.6}", t.sweep_seconds),
                format!("{:.6}", t.xcorr_seconds),
            ]
        })
        .collect();
    write_table(
        &out_dir.join("timing.csv"),
        &[
            "length",
            "snr_db",
            "trial",
            "sweep_seconds",
            "xcorr_seconds",
        ],
        &timing,
    )
}

pub fn check_failures(results: &BenchResults) -> Result<()> {
    let failed = results.failures();
    let total = results.records.len();
    if failed as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(CliError::TooManyFailures { failed, total });
    }
    Ok(())
}

pub fn run(settings: &Settings, out_dir: &Path) -> Result<String> {
    let spec = BenchSpec::from_settings(settings)?;
    let results = run_bench(&spec)?;
    write_results(&results, out_dir)?;
    check_failures(&results)?;
    Ok(format!(
        "{} trials, {} failed computations; tables in {}",
        results.timings.len(),
        results.failures(),
        out_dir.display()
    ))
}
