//! Cross-correlation estimator of the residence time.
//!
//! The kernel is the input/output cross-correlation rescaled so that the
//! reconstruction has the standard deviation of the observed output. It
//! assumes a white input and ignores the positivity and causality
//! constraints; it serves as the comparison baseline.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signals::{Convolver, Kernel, TimeSeries};
use crate::solver::{mean, DeconvResult, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide every lag by `T`.
    #[default]
    Biased,
    /// Divide lag `l` by the overlap `T - |l|`.
    Unbiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XcorrConfig {
    pub kernel_len: usize,
    pub demean: bool,
    pub normalization: Normalization,
}

impl XcorrConfig {
    pub fn new(kernel_len: usize) -> Self {
        Self {
            kernel_len,
            demean: true,
            normalization: Normalization::Biased,
        }
    }
}

/// Population standard deviation.
pub(crate) fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

fn centered(v: &[f64], demean: bool) -> Vec<f64> {
    if demean {
        let m = mean(v);
        v.iter().map(|a| a - m).collect()
    } else {
        v.to_vec()
    }
}

/// Cross-correlation `R_xy` over lags `-K/2 ..= K/2 - 1`.
pub fn cross_correlation(x: &TimeSeries, y: &TimeSeries, config: &XcorrConfig) -> Result<Kernel> {
    if x.len() != y.len() {
        return invalid(format!(
            "input and output lengths differ ({} vs {})",
            x.len(),
            y.len()
        ));
    }
    let k_len = config.kernel_len;
    if k_len > 2 * x.len() {
        return invalid(format!(
            "kernel length {k_len} exceeds twice the series length {}",
            x.len()
        ));
    }
    let xc = TimeSeries::new(centered(x.as_slice(), config.demean))?;
    let yc = centered(y.as_slice(), config.demean);
    let conv = Convolver::new(&xc, k_len)?;
    let raw = conv.correlate(&yc)?;
    let t_len = x.len() as f64;
    let half = (k_len / 2) as isize;
    let values = raw
        .iter()
        .enumerate()
        .map(|(j, r)| match config.normalization {
            Normalization::Biased => r / t_len,
            Normalization::Unbiased => {
                let overlap = t_len - (j as isize - half).unsigned_abs() as f64;
                if overlap > 0.0 {
                    r / overlap
                } else {
                    0.0
                }
            }
        })
        .collect();
    Kernel::new(values)
}

/// Rescaled cross-correlation estimate. The returned kernel is not
/// projected onto the constraint set.
pub fn xcorr_estimate(
    x: &TimeSeries,
    y: &TimeSeries,
    config: &XcorrConfig,
) -> Result<DeconvResult> {
    let r = cross_correlation(x, y, config)?;
    let conv = Convolver::new(x, config.kernel_len)?;
    let y_rec0 = conv.convolve(&r)?;
    let spread = std_dev(&y_rec0);
    if spread <= 0.0 || !spread.is_finite() {
        return Err(Error::NumericalFailure(
            "cross-correlation reconstruction has zero variance; amplitude rescale undefined"
                .into(),
        ));
    }
    let gain = std_dev(y.as_slice()) / spread;
    let k_est = r.scaled(gain)?;
    let xk = conv.convolve(&k_est)?;
    let c_est = mean(
        &y.as_slice()
            .iter()
            .zip(&xk)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    let y_rec = TimeSeries::new(xk.iter().map(|v| v + c_est).collect())?;
    Ok(DeconvResult {
        k_est,
        c_est,
        y_rec,
        objective_trace: Vec::new(),
        outer_iterations: 0,
        converged: true,
        stop_reason: StopReason::ClosedForm,
    })
}
