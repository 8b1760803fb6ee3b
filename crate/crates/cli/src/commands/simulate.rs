use std::path::Path;

use residence_core::synth::{
    generate_scenario_with, KernelSpec, MultifractalParams, NoiseReference, Scenario,
};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::io::{write_json, write_kernel, write_series};
use crate::settings::Settings;

pub const DEFAULT_LENGTH: usize = 1024;
pub const DEFAULT_KERNEL_LENGTH: usize = 1000;
pub const DEFAULT_OFFSET: f64 = 100.0;
pub const DEFAULT_SNR_DB: f64 = 25.0;

/// Scalar description of a simulated scenario (the series go to CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub params: MultifractalParams,
    pub kernel: KernelSpec,
    pub length: usize,
    pub kernel_length: usize,
    pub c_true: f64,
    #[serde(with = "residence_core::float_serde")]
    pub input_snr_db: f64,
    pub noise_reference: NoiseReference,
    pub noise_variance: f64,
    pub seed: u64,
}

pub fn multifractal_params(settings: &Settings) -> MultifractalParams {
    let d = MultifractalParams::default();
    MultifractalParams {
        h: settings.h.unwrap_or(d.h),
        c1: settings.c1.unwrap_or(d.c1),
        alpha: settings.alpha.unwrap_or(d.alpha),
    }
}

pub fn kernel_spec(settings: &Settings) -> Result<KernelSpec> {
    let k = settings.kernel_length.unwrap_or(DEFAULT_KERNEL_LENGTH);
    if k < 4 || !k.is_multiple_of(2) {
        return invalid(format!("--kernel-length must be even and >= 4, got {k}"));
    }
    Ok(KernelSpec::with_support(k / 2))
}

pub fn simulate(settings: &Settings) -> Result<(Scenario, ScenarioInfo)> {
    let params = multifractal_params(settings);
    let kernel = kernel_spec(settings)?;
    let length = settings.length.unwrap_or(DEFAULT_LENGTH);
    let c_true = settings.offset.unwrap_or(DEFAULT_OFFSET);
    let snr = settings.snr_db.unwrap_or(DEFAULT_SNR_DB);
    let reference = settings.noise_reference.unwrap_or_default();
    let seed = settings.seed.unwrap_or(0);
    let scenario = generate_scenario_with(&params, &kernel, length, c_true, snr, reference, seed)?;
    let info = ScenarioInfo {
        params,
        kernel,
        length,
        kernel_length: 2 * kernel.support_length,
        c_true,
        input_snr_db: snr,
        noise_reference: reference,
        noise_variance: scenario.noise_variance,
        seed,
    };
    Ok((scenario, info))
}

pub fn run(settings: &Settings, out_dir: &Path) -> Result<String> {
    let (scenario, info) = simulate(settings)?;
    write_series(&out_dir.join("x.csv"), scenario.x.as_slice())?;
    write_series(&out_dir.join("y.csv"), scenario.y_noisy.as_slice())?;
    write_series(&out_dir.join("y_clean.csv"), scenario.y_clean.as_slice())?;
    write_kernel(&out_dir.join("k_true.csv"), &scenario.k_true)?;
    write_json(&out_dir.join("scenario.json"), &info)?;
    Ok(format!(
        "simulated {} samples (noise variance {:.6e}) into {}",
        info.length,
        info.noise_variance,
        out_dir.display()
    ))
}
