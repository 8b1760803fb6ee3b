//! Quality metrics, regularization sweeps and automatic selection of the
//! smoothness weight.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signals::{Kernel, TimeSeries};
use crate::solver::{mean, DeconvResult, Problem, SolverConfig};

/// `20 log10(||m||^2 / ||m - m_est||^2)` in dB; `+inf` when `m_est == m`.
///
/// Squared norms inside the logarithm and the factor 20 are intentional.
pub fn snr_db(m: &[f64], m_est: &[f64]) -> Result<f64> {
    if m.len() != m_est.len() {
        return invalid(format!("length mismatch ({} vs {})", m.len(), m_est.len()));
    }
    let signal: f64 = m.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return invalid("reference signal has zero norm");
    }
    let err: f64 = m.iter().zip(m_est).map(|(a, b)| (a - b).powi(2)).sum();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (signal / err).log10())
}

/// Pearson correlation coefficient.
pub fn corr_coeff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return invalid("correlation needs two series of equal length >= 2");
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (p, q) in a.iter().zip(b) {
        let (da, db) = (p - ma, q - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return invalid("correlation undefined for a constant series");
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Population variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// First moment of the kernel over its nonnegative lags.
pub fn mean_residence_time(k: &Kernel) -> Result<f64> {
    let causal = k.causal_part();
    let mass: f64 = causal.iter().sum();
    if mass.is_nan() || mass <= 0.0 {
        return invalid("kernel has no positive mass on nonnegative lags");
    }
    let moment: f64 = causal.iter().enumerate().map(|(t, v)| v * t as f64).sum();
    Ok(moment / mass)
}

/// Strictly increasing positive regularization weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("lambda grid is empty");
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return invalid("lambda grid values must be positive and finite");
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("lambda grid must be strictly increasing");
        }
        Ok(Self { values })
    }

    /// `count` values evenly spaced in `log10` between `min` and `max`.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return invalid("lambda grid needs at least one value");
        }
        if !(min > 0.0 && max >= min) {
            return invalid(format!("invalid grid bounds {min}..{max}"));
        }
        if count == 1 {
            return Self::new(vec![min]);
        }
        let (lo, hi) = (min.log10(), max.log10());
        let step = (hi - lo) / (count - 1) as f64;
        Self::new(
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        max
                    } else {
                        10f64.powf(lo + step * i as f64)
                    }
                })
                .collect(),
        )
    }

    /// Synthetic benchmark grid: 20 values from `1e-5` to `1e12`.
    pub fn synthetic_default() -> Self {
        Self::log_spaced(1e-5, 1e12, 20).expect("static grid")
    }

    /// Grid for field data: one value per decade from `1e2` to `1e8`.
    pub fn field_default() -> Self {
        Self::log_spaced(1e2, 1e8, 7).expect("static grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl TryFrom<Vec<f64>> for LambdaGrid {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<LambdaGrid> for Vec<f64> {
    fn from(g: LambdaGrid) -> Self {
        g.values
    }
}

/// Metrics of one successful solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSolve {
    pub result: DeconvResult,
    #[serde(with = "crate::float_serde::option")]
    pub y_rec_snr_db: Option<f64>,
    pub y_corr_coeff: Option<f64>,
    #[serde(with = "crate::float_serde::option", default)]
    pub k_snr_db: Option<f64>,
    pub residual_variance: f64,
}

impl SweepSolve {
    pub fn evaluate(y: &[f64], result: DeconvResult, k_true: Option<&Kernel>) -> Result<Self> {
        let y_rec = result.y_rec.as_slice();
        let k_snr_db = match k_true {
            Some(k) => {
                if k.len() != result.k_est.len() {
                    return invalid(format!(
                        "ground-truth kernel length {} does not match {}",
                        k.len(),
                        result.k_est.len()
                    ));
                }
                Some(snr_db(k.values(), result.k_est.values())?)
            }
            None => None,
        };
        let residual: Vec<f64> = y.iter().zip(y_rec).map(|(a, b)| a - b).collect();
        Ok(Self {
            y_rec_snr_db: snr_db(y, y_rec).ok(),
            y_corr_coeff: corr_coeff(y, y_rec).ok(),
            k_snr_db,
            residual_variance: variance(&residual),
            result,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub lambda: f64,
    /// Solver failures are recorded per entry; the sweep continues.
    pub outcome: std::result::Result<SweepSolve, String>,
    pub runtime_seconds: f64,
}

impl SweepEntry {
    pub fn solve(&self) -> Option<&SweepSolve> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kernel_len: usize,
    pub noise_variance: Option<f64>,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_err()).count()
    }
}

/// One solve per grid value, in parallel, reported in grid order.
pub fn sweep(
    x: &TimeSeries,
    y: &TimeSeries,
    kernel_len: usize,
    grid: &LambdaGrid,
    base_config: &SolverConfig,
    ground_truth: Option<&Kernel>,
    noise_variance: Option<f64>,
) -> Result<SweepReport> {
    let problem = Problem::new(x, y, kernel_len)?;
    sweep_problem(&problem, grid, base_config, ground_truth, noise_variance)
}

pub fn sweep_problem(
    problem: &Problem,
    grid: &LambdaGrid,
    base_config: &SolverConfig,
    ground_truth: Option<&Kernel>,
    noise_variance: Option<f64>,
) -> Result<SweepReport> {
    base_config.validate()?;
    if let Some(k) = ground_truth {
        if k.len() != problem.kernel_len() {
            return invalid(format!(
                "ground-truth kernel length {} does not match {}",
                k.len(),
                problem.kernel_len()
            ));
        }
    }
    let entries = grid
        .values()
        .par_iter()
        .map(|&lambda| {
            let config = SolverConfig {
                lambda,
                ..*base_config
            };
            let start = Instant::now();
            let outcome = problem
                .solve(&config)
                .and_then(|r| SweepSolve::evaluate(problem.output(), r, ground_truth))
                .map_err(|e| e.to_string());
            SweepEntry {
                lambda,
                outcome,
                runtime_seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    Ok(SweepReport {
        kernel_len: problem.kernel_len(),
        noise_variance,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Best kernel SNR against the ground truth.
    Oracle,
    /// Residual variance closest to the noise variance.
    Discrepancy,
    /// Best reconstruction SNR.
    Fidelity,
    /// Best correlation between reconstruction and observation.
    #[serde(rename = "corr", alias = "corr_coeff", alias = "corrCoeff")]
    CorrCoeff,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Oracle,
        Strategy::Discrepancy,
        Strategy::Fidelity,
        Strategy::CorrCoeff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Oracle => "oracle",
            Strategy::Discrepancy => "discrepancy",
            Strategy::Fidelity => "fidelity",
            Strategy::CorrCoeff => "corr",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oracle" => Ok(Strategy::Oracle),
            "discrepancy" => Ok(Strategy::Discrepancy),
            "fidelity" => Ok(Strategy::Fidelity),
            "corr" | "corrcoeff" | "corr_coeff" => Ok(Strategy::CorrCoeff),
            other => invalid(format!(
                "unknown strategy {other:?} (expected oracle, discrepancy, fidelity or corr)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySelection {
    pub strategy: Strategy,
    pub chosen_lambda: f64,
    pub chosen_result: DeconvResult,
    /// Value of the maximized (or, for the discrepancy rule, minimized) quantity.
    #[serde(with = "crate::float_serde")]
    pub criterion_value: f64,
}

/// Applies a selection strategy to a sweep. Ties go to the larger lambda.
///
/// `noise_variance` overrides the one stored in the report.
pub fn select_lambda(
    report: &SweepReport,
    strategy: Strategy,
    noise_variance: Option<f64>,
) -> Result<StrategySelection> {
    let noise_variance = noise_variance.or(report.noise_variance);
    let solved: Vec<(f64, &SweepSolve)> = report
        .entries
        .iter()
        .filter_map(|e| e.solve().map(|s| (e.lambda, s)))
        .collect();

    let (scores, maximize): (Vec<f64>, bool) = match strategy {
        Strategy::Oracle => {
            if solved.iter().any(|(_, s)| s.k_snr_db.is_none()) {
                return invalid("oracle strategy requires a ground-truth kernel");
            }
            (
                solved
                    .iter()
                    .map(|(_, s)| s.k_snr_db.unwrap_or(f64::NAN))
                    .collect(),
                true,
            )
        }
        Strategy::Discrepancy => {
            let Some(sigma2) = noise_variance else {
                return invalid("discrepancy strategy requires the noise variance");
            };
            if !(sigma2 >= 0.0 && sigma2.is_finite()) {
                return invalid(format!(
                    "noise variance must be finite and >= 0, got {sigma2}"
                ));
            }
            (
                solved
                    .iter()
                    .map(|(_, s)| (s.residual_variance - sigma2).abs())
                    .collect(),
                false,
            )
        }
        Strategy::Fidelity => (
            solved
                .iter()
                .map(|(_, s)| s.y_rec_snr_db.unwrap_or(f64::NAN))
                .collect(),
            true,
        ),
        Strategy::CorrCoeff => (
            solved
                .iter()
                .map(|(_, s)| s.y_corr_coeff.unwrap_or(f64::NAN))
                .collect(),
            true,
        ),
    };

    // grid order is ascending, so `>=` / `<=` hands ties to the larger lambda
    let mut best: Option<usize> = None;
    for (i, &score) in scores.iter().enumerate() {
        if score.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) if maximize => score >= scores[b],
            Some(b) => score <= scores[b],
        };
        if better {
            best = Some(i);
        }
    }
    let i = best.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "{strategy} strategy: no sweep entry has a usable criterion value"
        ))
    })?;
    let (chosen_lambda, solve) = solved[i];
    Ok(StrategySelection {
        strategy,
        chosen_lambda,
        chosen_result: solve.result.clone(),
        criterion_value: scores[i],
    })
}
