//! Synthetic benchmark scenarios: universal-multifractal rainfall,
//! Beta-shaped ground-truth kernels and Gaussian noise calibrated to an
//! exact input SNR.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signals::{convolve, Kernel, TimeSeries};

/// Universal multifractal parameters `(H, C1, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultifractalParams {
    /// Nonconservation exponent (order of the final fractional integration).
    pub h: f64,
    /// Codimension of the mean.
    pub c1: f64,
    /// Levy multifractality index, in `(0, 2]`.
    pub alpha: f64,
}

impl Default for MultifractalParams {
    fn default() -> Self {
        Self {
            h: -0.1,
            c1: 0.4,
            alpha: 0.7,
        }
    }
}

impl MultifractalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return invalid(format!("alpha must lie in (0, 2], got {}", self.alpha));
        }
        if self.alpha == 1.0 {
            return Err(Error::Unsupported(
                "alpha = 1 (log-stable generator) is not supported".into(),
            ));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return invalid(format!("C1 must be positive, got {}", self.c1));
        }
        if !self.h.is_finite() {
            return invalid("H must be finite");
        }
        Ok(())
    }

    /// Theoretical moment-scaling function `K(q) = C1 (q^alpha - q) / (alpha - 1)`.
    pub fn moment_scaling(&self, q: f64) -> f64 {
        self.c1 * (q.powf(self.alpha) - q) / (self.alpha - 1.0)
    }
}

/// Maximally skewed (`beta = -1`) unit-scale stable variate, via the
/// Chambers-Mallows-Stuck construction. For this skewness the Laplace
/// transform is `E[exp(q X)] = exp(-q^alpha / cos(pi alpha / 2))`, finite
/// for every `q >= 0`.
fn extremal_stable<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    let beta = -1.0f64;
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let t = beta * (PI * alpha / 2.0).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
}

fn fft_in_place(buf: &mut [Complex<f64>], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(buf);
}

fn check_length(len: usize) -> Result<()> {
    if len < 64 || !len.is_power_of_two() {
        return invalid(format!(
            "series length must be a power of two >= 64, got {len}"
        ));
    }
    Ok(())
}

/// Unit-mean multiplicative flux `exp(Gamma)` of the cascade, before the
/// final `H` integration.
///
/// The generator is the stable noise convolved (periodically) with the
/// kernel `A |t|^(-1/alpha)`, whose `alpha`-th power decays as `1/|t|` and
/// so produces the logarithmic scale divergence of a cascade. `A` is chosen
/// so that `log E[exp(q Gamma)] = C1 / (alpha - 1) q^alpha log(scale ratio)`.
pub fn simulate_flux(params: &MultifractalParams, len: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    check_length(len)?;
    let alpha = params.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..len).map(|_| extremal_stable(alpha, &mut rng)).collect();

    let amp = (params.c1 * (PI * alpha / 2.0).cos() / (2.0 * (1.0 - alpha))).powf(1.0 / alpha);
    let mut weights: Vec<Complex<f64>> = (0..len)
        .map(|d| {
            let dist = d.min(len - d).max(1) as f64;
            Complex::new(amp * dist.powf(-1.0 / alpha), 0.0)
        })
        .collect();
    let mut gen: Vec<Complex<f64>> = noise.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_in_place(&mut weights, false);
    fft_in_place(&mut gen, false);
    for (g, w) in gen.iter_mut().zip(&weights) {
        *g *= w;
    }
    fft_in_place(&mut gen, true);
    let scale = 1.0 / len as f64;
    let gamma: Vec<f64> = gen.iter().map(|c| c.re * scale).collect();

    let top = gamma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut flux: Vec<f64> = gamma.iter().map(|g| (g - top).exp()).collect();
    let m = flux.iter().sum::<f64>() / len as f64;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::NumericalFailure(
            "multifractal flux has zero mean".into(),
        ));
    }
    for f in &mut flux {
        *f /= m;
    }
    Ok(flux)
}

/// Multifractal rainfall of length `len` (power of two, >= 64).
///
/// The flux from [`simulate_flux`] is fractionally integrated with the
/// filter `|omega|^(-H)` (unit gain at zero frequency) and negative values
/// are clipped to zero.
pub fn simulate_rainfall(params: &MultifractalParams, len: usize, seed: u64) -> Result<TimeSeries> {
    let flux = simulate_flux(params, len, seed)?;
    let mut buf: Vec<Complex<f64>> = flux.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    for (f, b) in buf.iter_mut().enumerate().skip(1) {
        let omega = 2.0 * PI * f.min(len - f) as f64 / len as f64;
        *b *= omega.powf(-params.h);
    }
    fft_in_place(&mut buf, true);
    let scale = 1.0 / len as f64;
    TimeSeries::new(buf.iter().map(|c| (c.re * scale).max(0.0)).collect())
}

/// Rainfall of arbitrary length: simulated at the next power of two
/// (at least 64) and truncated.
pub fn rainfall(params: &MultifractalParams, len: usize, seed: u64) -> Result<TimeSeries> {
    if len == 0 {
        return invalid("rainfall length must be positive");
    }
    let full = len.next_power_of_two().max(64);
    let mut x = simulate_rainfall(params, full, seed)?.into_vec();
    x.truncate(len);
    TimeSeries::new(x)
}

/// Beta-shaped ground-truth kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub beta_a: f64,
    pub beta_b: f64,
    /// Number of nonnegative lags (`K/2`).
    pub support_length: usize,
    /// Sum of the kernel after normalization.
    pub amplitude: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            beta_a: 2.0,
            beta_b: 6.0,
            support_length: 500,
            amplitude: 1.0,
        }
    }
}

impl KernelSpec {
    pub fn with_support(support_length: usize) -> Self {
        Self {
            support_length,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_a > 0.0 && self.beta_b > 0.0) {
            return invalid("Beta shape parameters must be positive");
        }
        if self.support_length < 2 {
            return invalid("kernel support must be at least 2 lags");
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return invalid("kernel amplitude must be positive");
        }
        Ok(())
    }
}

/// Causal kernel of length `2 * support_length` sampling the Beta density
/// at the midpoints `(i + 0.5) / support_length`, normalized to sum to the
/// amplitude.
pub fn make_beta_kernel(spec: &KernelSpec) -> Result<Kernel> {
    spec.validate()?;
    let n = spec.support_length as f64;
    let density: Vec<f64> = (0..spec.support_length)
        .map(|i| {
            let u = (i as f64 + 0.5) / n;
            u.powf(spec.beta_a - 1.0) * (1.0 - u).powf(spec.beta_b - 1.0)
        })
        .collect();
    let total: f64 = density.iter().sum();
    let causal: Vec<f64> = density.iter().map(|d| d / total * spec.amplitude).collect();
    Kernel::from_causal(&causal)
}

/// Signal the noise level is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseReference {
    /// The convolved response `x * k_true`; the offset is added afterwards.
    #[default]
    Response,
    /// The full clean output `x * k_true + c_true`.
    Output,
}

/// Synthetic ground truth together with its observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub x: TimeSeries,
    pub k_true: Kernel,
    pub c_true: f64,
    pub y_clean: TimeSeries,
    pub y_noisy: TimeSeries,
    pub noise_variance: f64,
    #[serde(with = "crate::float_serde")]
    pub input_snr_db: f64,
    pub noise_reference: NoiseReference,
    pub seed: u64,
}

impl Scenario {
    /// The signal the input SNR refers to.
    pub fn noise_reference_signal(&self) -> Vec<f64> {
        match self.noise_reference {
            NoiseReference::Output => self.y_clean.as_slice().to_vec(),
            NoiseReference::Response => self
                .y_clean
                .as_slice()
                .iter()
                .map(|v| v - self.c_true)
                .collect(),
        }
    }
}

/// Adds white Gaussian noise `n` to `y_clean = x * k_true + c_true`, with
/// `n` rescaled so that `20 log10(||m||^2 / ||n||^2)` equals `input_snr_db`
/// exactly, where `m` is the reference signal. `+inf` means no noise.
pub fn synthesize_observation(
    x: &TimeSeries,
    k_true: &Kernel,
    c_true: f64,
    input_snr_db: f64,
    reference: NoiseReference,
    seed: u64,
) -> Result<Scenario> {
    if input_snr_db.is_nan() || input_snr_db == f64::NEG_INFINITY {
        return invalid(format!(
            "input SNR must be finite or +inf, got {input_snr_db}"
        ));
    }
    let response = convolve(x, k_true)?.into_vec();
    let clean: Vec<f64> = response.iter().map(|v| v + c_true).collect();
    let energy: f64 = match reference {
        NoiseReference::Response => response.iter().map(|v| v * v).sum(),
        NoiseReference::Output => clean.iter().map(|v| v * v).sum(),
    };
    let (noisy, noise_variance) = if input_snr_db == f64::INFINITY {
        (clean.clone(), 0.0)
    } else {
        if energy == 0.0 {
            return invalid("noise reference signal has zero energy; cannot calibrate SNR");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noise: Vec<f64> = (0..clean.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let drawn: f64 = noise.iter().map(|v| v * v).sum();
        let target = energy / 10f64.powf(input_snr_db / 20.0);
        let gain = (target / drawn).sqrt();
        for n in &mut noise {
            *n *= gain;
        }
        let actual: f64 = noise.iter().map(|v| v * v).sum();
        let noisy = clean.iter().zip(&noise).map(|(c, n)| c + n).collect();
        (noisy, actual / clean.len() as f64)
    };
    Ok(Scenario {
        x: x.clone(),
        k_true: k_true.clone(),
        c_true,
        y_clean: TimeSeries::new(clean)?,
        y_noisy: TimeSeries::new(noisy)?,
        noise_variance,
        input_snr_db,
        noise_reference: reference,
        seed,
    })
}

/// SplitMix64 mixing of a base seed with a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Full synthetic scenario with noise calibrated on the response `x * k`.
pub fn generate_scenario(
    params: &MultifractalParams,
    kernel: &KernelSpec,
    len: usize,
    c_true: f64,
    input_snr_db: f64,
    seed: u64,
) -> Result<Scenario> {
    generate_scenario_with(
        params,
        kernel,
        len,
        c_true,
        input_snr_db,
        NoiseReference::Response,
        seed,
    )
}

/// Multifractal rainfall of length `len`, Beta kernel, offset and noise.
/// Rainfall and noise use independent streams derived from `seed`.
pub fn generate_scenario_with(
    params: &MultifractalParams,
    kernel: &KernelSpec,
    len: usize,
    c_true: f64,
    input_snr_db: f64,
    reference: NoiseReference,
    seed: u64,
) -> Result<Scenario> {
    let x = rainfall(params, len, derive_seed(seed, 1))?;
    let k = make_beta_kernel(kernel)?;
    let mut s = synthesize_observation(
        &x,
        &k,
        c_true,
        input_snr_db,
        reference,
        derive_seed(seed, 2),
    )?;
    s.seed = seed;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters_give_nonnegative_varying_rain() {
        let x = simulate_rainfall(&MultifractalParams::default(), 1024, 1).unwrap();
        let v = x.as_slice();
        assert!(v.iter().all(|&r| r >= 0.0));
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|r| (r - m).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(var > 0.0);
    }

    #[test]
    fn vanishing_codimension_gives_flat_series() {
        let params = MultifractalParams {
            c1: 1e-8,
            ..MultifractalParams::default()
        };
        let flux = simulate_flux(&params, 1024, 2).unwrap();
        assert!(flux.iter().all(|f| (f - 1.0).abs() < 1e-6));
        let x = simulate_rainfall(&params, 1024, 2).unwrap();
        assert!(x.as_slice().iter().all(|r| (r - 1.0).abs() < 1e-4));
    }

    #[test]
    fn rainfall_is_deterministic() {
        let p = MultifractalParams::default();
        let a = simulate_rainfall(&p, 256, 99).unwrap();
        let b = simulate_rainfall(&p, 256, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_rainfall(&p, 256, 100).unwrap());
    }

    #[test]
    fn rainfall_argument_errors() {
        let p = MultifractalParams::default();
        assert!(matches!(
            simulate_rainfall(&p, 1000, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            simulate_rainfall(&p, 32, 0),
            Err(Error::InvalidArgument(_))
        ));
        let log_stable = MultifractalParams { alpha: 1.0, ..p };
        assert!(matches!(
            simulate_rainfall(&log_stable, 64, 0),
            Err(Error::Unsupported(_))
        ));
        let bad = MultifractalParams { alpha: 2.5, ..p };
        assert!(simulate_rainfall(&bad, 64, 0).is_err());
        assert_eq!(rainfall(&p, 1000, 5).unwrap().len(), 1000);
    }

    #[test]
    fn gaussian_generator_case() {
        let p = MultifractalParams {
            h: 0.0,
            c1: 0.1,
            alpha: 2.0,
        };
        let x = simulate_rainfall(&p, 512, 3).unwrap();
        assert!(x.as_slice().iter().all(|r| r.is_finite() && *r >= 0.0));
    }

    #[test]
    fn beta_kernel_mode_and_mass() {
        let k = make_beta_kernel(&KernelSpec::default()).unwrap();
        assert_eq!(k.len(), 1000);
        assert!(k.is_causal() && k.is_nonnegative());
        let total: f64 = k.causal_part().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Beta(2, 6) mode at 1/6 of the support
        let mode = k.argmax_lag();
        assert!((mode - 83).abs() <= 1, "mode {mode}");
        let causal = k.causal_part();
        let peak = mode as usize;
        assert!(causal[..peak].windows(2).all(|w| w[0] <= w[1]));
        assert!(causal[peak..].windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn uniform_beta_kernel() {
        let spec = KernelSpec {
            beta_a: 1.0,
            beta_b: 1.0,
            support_length: 10,
            amplitude: 3.0,
        };
        let k = make_beta_kernel(&spec).unwrap();
        assert!(k.causal_part().iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn infinite_snr_means_no_noise() {
        let x = rainfall(&MultifractalParams::default(), 300, 4).unwrap();
        let k = make_beta_kernel(&KernelSpec::with_support(20)).unwrap();
        let s = synthesize_observation(&x, &k, 100.0, f64::INFINITY, NoiseReference::Output, 4)
            .unwrap();
        assert_eq!(s.y_clean, s.y_noisy);
        assert_eq!(s.noise_variance, 0.0);
    }

    #[test]
    fn snr_calibration_is_exact() {
        let x = rainfall(&MultifractalParams::default(), 500, 5).unwrap();
        let k = make_beta_kernel(&KernelSpec::with_support(30)).unwrap();
        for (snr, reference) in [
            (0.0, NoiseReference::Output),
            (5.0, NoiseReference::Response),
            (17.5, NoiseReference::Output),
            (30.0, NoiseReference::Response),
        ] {
            let s = synthesize_observation(&x, &k, 100.0, snr, reference, 6).unwrap();
            let m = s.noise_reference_signal();
            let m_noisy: Vec<f64> = s
                .y_noisy
                .as_slice()
                .iter()
                .zip(s.y_clean.as_slice())
                .zip(&m)
                .map(|((n, c), r)| n - c + r)
                .collect();
            let got = crate::select::snr_db(&m, &m_noisy).unwrap();
            assert!((got - snr).abs() < 1e-9, "{got} vs {snr}");
            if reference == NoiseReference::Output {
                let direct =
                    crate::select::snr_db(s.y_clean.as_slice(), s.y_noisy.as_slice()).unwrap();
                assert!((direct - snr).abs() < 1e-9);
            }
            let noise: Vec<f64> = s
                .y_noisy
                .as_slice()
                .iter()
                .zip(s.y_clean.as_slice())
                .map(|(a, b)| a - b)
                .collect();
            let t = noise.len() as f64;
            let m = noise.iter().sum::<f64>() / t;
            assert!(m.abs() <= 5.0 * s.noise_variance.sqrt() / t.sqrt());
        }
    }

    #[test]
    fn offset_only_scenario() {
        let x = TimeSeries::new(vec![0.0; 256]).unwrap();
        let k = Kernel::zeros(20).unwrap();
        let s = synthesize_observation(&x, &k, 100.0, 20.0, NoiseReference::Output, 7).unwrap();
        let m = s.y_noisy.as_slice().iter().sum::<f64>() / 256.0;
        assert!((m - 100.0).abs() < 5.0 * s.noise_variance.sqrt() / 16.0);
    }

    #[test]
    fn zero_energy_cannot_be_calibrated() {
        let x = TimeSeries::new(vec![0.0; 64]).unwrap();
        let k = Kernel::zeros(4).unwrap();
        assert!(synthesize_observation(&x, &k, 0.0, 10.0, NoiseReference::Output, 0).is_err());
        assert!(synthesize_observation(&x, &k, 100.0, 10.0, NoiseReference::Response, 0).is_err());
    }

    #[test]
    fn scenario_reconvolves() {
        let s = generate_scenario(
            &MultifractalParams::default(),
            &KernelSpec::with_support(40),
            400,
            100.0,
            15.0,
            8,
        )
        .unwrap();
        let again = convolve(&s.x, &s.k_true).unwrap();
        for (a, b) in again.as_slice().iter().zip(s.y_clean.as_slice()) {
            assert!((a + 100.0 - b).abs() < 1e-10);
        }
        assert!(s.x.as_slice().iter().all(|&r| r >= 0.0));
    }
}
