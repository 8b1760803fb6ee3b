//! Signal types, linear convolution, the positivity/causality projection and
//! the first-difference smoothness operator.

use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniformly sampled real-valued series (unit sampling step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return invalid("time series must have at least one sample");
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("time series sample {i} is not finite"));
        }
        Ok(Self(samples))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Rejects series with negative entries (rainfall inputs).
    pub fn ensure_nonnegative(&self) -> Result<()> {
        match self.0.iter().position(|&v| v < 0.0) {
            Some(i) => invalid(format!("sample {i} is negative ({})", self.0[i])),
            None => Ok(()),
        }
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Two-sided impulse response of even length `K`.
///
/// Entry `j` holds lag `j - K/2`, so lags run over `-K/2 ..= K/2 - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Kernel {
    values: Vec<f64>,
}

impl Kernel {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || !values.len().is_multiple_of(2) {
            return invalid(format!(
                "kernel length must be even and >= 2, got {}",
                values.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("kernel entry {i} is not finite"));
        }
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    /// Builds a causal kernel whose nonnegative lags `0..n` hold `causal`;
    /// the total length is `2 n`.
    pub fn from_causal(causal: &[f64]) -> Result<Self> {
        let mut values = vec![0.0; 2 * causal.len()];
        values[causal.len()..].copy_from_slice(causal);
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_length(&self) -> usize {
        self.values.len() / 2
    }

    /// Lag held by entry 0 (always `-K/2`).
    pub fn lag_offset(&self) -> isize {
        -(self.half_length() as isize)
    }

    pub fn lag(&self, index: usize) -> isize {
        index as isize + self.lag_offset()
    }

    pub fn lags(&self) -> impl Iterator<Item = isize> + '_ {
        (0..self.len()).map(move |j| self.lag(j))
    }

    /// Value at `lag`, zero outside the kernel's support.
    pub fn at_lag(&self, lag: isize) -> f64 {
        let j = lag - self.lag_offset();
        if j < 0 || j as usize >= self.len() {
            0.0
        } else {
            self.values[j as usize]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Entries for lags `0 ..= K/2 - 1`.
    pub fn causal_part(&self) -> &[f64] {
        &self.values[self.half_length()..]
    }

    pub fn is_causal(&self) -> bool {
        self.values[..self.half_length()].iter().all(|&v| v == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Lag of the largest entry (first one on ties).
    pub fn argmax_lag(&self) -> isize {
        let mut best = 0;
        for (j, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = j;
            }
        }
        self.lag(best)
    }
}

impl TryFrom<Vec<f64>> for Kernel {
    type Error = crate::Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Kernel> for Vec<f64> {
    fn from(k: Kernel) -> Self {
        k.values
    }
}

pub(crate) fn fft_len(min_len: usize) -> usize {
    min_len.max(1).next_power_of_two()
}

/// Linear (non-circular) convolution by a fixed input series.
///
/// The zero-padded spectrum of the input is computed once, so repeated
/// convolutions with different kernels of length `K` cost one forward and
/// one inverse transform each.
#[derive(Clone)]
pub struct Convolver {
    input: Vec<f64>,
    kernel_len: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    input_spectrum: Vec<Complex<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("series_len", &self.input.len())
            .field("kernel_len", &self.kernel_len)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl Convolver {
    pub fn new(x: &TimeSeries, kernel_len: usize) -> Result<Self> {
        if kernel_len < 2 || !kernel_len.is_multiple_of(2) {
            return invalid(format!(
                "kernel length must be even and >= 2, got {kernel_len}"
            ));
        }
        let n = fft_len(x.len() + kernel_len - 1);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut input_spectrum = padded(x.as_slice(), n);
        forward.process(&mut input_spectrum);
        Ok(Self {
            input: x.as_slice().to_vec(),
            kernel_len,
            fft_len: n,
            forward,
            inverse,
            input_spectrum,
        })
    }

    pub fn series_len(&self) -> usize {
        self.input.len()
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    /// `z[t] = sum_j k[j] x[t - lag_j]` for `t in 0..T`, out-of-range `x`
    /// treated as zero.
    pub fn convolve(&self, k: &Kernel) -> Result<Vec<f64>> {
        if k.len() != self.kernel_len {
            return invalid(format!(
                "kernel length {} does not match convolver length {}",
                k.len(),
                self.kernel_len
            ));
        }
        Ok(self.convolve_values(k.values()))
    }

    pub(crate) fn convolve_values(&self, k: &[f64]) -> Vec<f64> {
        debug_assert_eq!(k.len(), self.kernel_len);
        let mut buf = padded(k, self.fft_len);
        self.forward.process(&mut buf);
        for (b, xs) in buf.iter_mut().zip(&self.input_spectrum) {
            *b *= xs;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        let shift = self.kernel_len / 2;
        buf[shift..shift + self.input.len()]
            .iter()
            .map(|c| c.re * scale)
            .collect()
    }

    /// Adjoint of [`convolve`](Self::convolve): `(X^T v)[j] = sum_t x[t - lag_j] v[t]`.
    pub fn correlate(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input.len() {
            return invalid(format!(
                "series length {} does not match convolver length {}",
                v.len(),
                self.input.len()
            ));
        }
        let mut buf = padded(v, self.fft_len);
        self.forward.process(&mut buf);
        for (b, xs) in buf.iter_mut().zip(&self.input_spectrum) {
            *b *= xs.conj();
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        let half = (self.kernel_len / 2) as isize;
        let n = self.fft_len as isize;
        Ok((0..self.kernel_len as isize)
            .map(|j| buf[(j - half).rem_euclid(n) as usize].re * scale)
            .collect())
    }
}

fn padded(values: &[f64], n: usize) -> Vec<Complex<f64>> {
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (b, &v) in buf.iter_mut().zip(values) {
        b.re = v;
    }
    buf
}

/// Linear convolution of `x` with `k`, truncated to the length of `x`.
pub fn convolve(x: &TimeSeries, k: &Kernel) -> Result<TimeSeries> {
    let conv = Convolver::new(x, k.len())?;
    TimeSeries::new(conv.convolve(k)?)
}

/// Orthogonal projection onto causal nonnegative kernels.
pub fn project_causal_nonneg(k: &Kernel) -> Kernel {
    let mut values = k.values().to_vec();
    project_values(&mut values);
    Kernel { values }
}

pub(crate) fn project_values(values: &mut [f64]) {
    let half = values.len() / 2;
    values[..half].fill(0.0);
    for v in &mut values[half..] {
        // `max` would keep -0.0
        if *v <= 0.0 {
            *v = 0.0;
        }
    }
}

/// First-order forward differences, shape `(K-1) x K`, no wrap-around row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifferenceOperator {
    size: usize,
}

impl DifferenceOperator {
    pub fn new(kernel_len: usize) -> Result<Self> {
        if kernel_len < 2 {
            return invalid(format!(
                "difference operator needs at least 2 columns, got {kernel_len}"
            ));
        }
        Ok(Self { size: kernel_len })
    }

    /// Number of columns (`K`).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn apply(&self, k: &Kernel) -> Result<Vec<f64>> {
        self.apply_slice(k.values())
    }

    pub fn apply_slice(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.size {
            return invalid(format!(
                "difference operator expects length {}, got {}",
                self.size,
                v.len()
            ));
        }
        Ok(v.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// `||D v||^2` without allocating.
    pub(crate) fn squared_norm(v: &[f64]) -> f64 {
        v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.size - 1, self.size);
        for i in 0..self.size - 1 {
            d[(i, i)] = -1.0;
            d[(i, i + 1)] = 1.0;
        }
        d
    }

    /// Adds `weight * D^T D` (tridiagonal) to a square matrix.
    pub fn add_scaled_gram(&self, m: &mut DMatrix<f64>, weight: f64) {
        let n = self.size;
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            m[(i, i)] += weight * deg;
            if i + 1 < n {
                m[(i, i + 1)] -= weight;
                m[(i + 1, i)] -= weight;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_convolve(x: &[f64], k: &Kernel) -> Vec<f64> {
        let t_len = x.len() as isize;
        (0..t_len)
            .map(|t| {
                k.lags()
                    .zip(k.values())
                    .map(|(lag, &kv)| {
                        let s = t - lag;
                        if s >= 0 && s < t_len {
                            kv * x[s as usize]
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum();
        let den: f64 = b.iter().map(|q| q * q).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    #[test]
    fn impulse_sifts_causal_kernel() {
        let mut x = vec![0.0; 100];
        x[10] = 1.0;
        let k = Kernel::from_causal(&[0.5, 0.3, 0.2, 0.1]).unwrap();
        let z = convolve(&TimeSeries::new(x).unwrap(), &k).unwrap();
        for (t, &v) in z.as_slice().iter().enumerate() {
            let expected = match t {
                10 => 0.5,
                11 => 0.3,
                12 => 0.2,
                13 => 0.1,
                _ => 0.0,
            };
            assert!((v - expected).abs() < 1e-14, "t={t} v={v}");
        }
    }

    #[test]
    fn zero_kernel_gives_zero_output() {
        let x = TimeSeries::new((0..50).map(|i| i as f64).collect()).unwrap();
        let z = convolve(&x, &Kernel::zeros(8).unwrap()).unwrap();
        assert!(z.as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn random_convolution_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = Kernel::new((0..16).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let z = convolve(&TimeSeries::new(x.clone()).unwrap(), &k).unwrap();
        assert!(rel_err(z.as_slice(), &naive_convolve(&x, &k)) <= 1e-10);
    }

    #[test]
    fn correlate_is_adjoint_of_convolve() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..37).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..37).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = Kernel::new((0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let conv = Convolver::new(&TimeSeries::new(x).unwrap(), 12).unwrap();
        let lhs: f64 = conv
            .convolve(&k)
            .unwrap()
            .iter()
            .zip(&v)
            .map(|(a, b)| a * b)
            .sum();
        let rhs: f64 = conv
            .correlate(&v)
            .unwrap()
            .iter()
            .zip(k.values())
            .map(|(a, b)| a * b)
            .sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn kernel_longer_than_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = Kernel::new((0..24).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let z = convolve(&TimeSeries::new(x.clone()).unwrap(), &k).unwrap();
        assert!(rel_err(z.as_slice(), &naive_convolve(&x, &k)) <= 1e-10);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(Kernel::new(vec![]).is_err());
        assert!(Kernel::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(TimeSeries::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn causal_response_never_precedes_input() {
        let t_len = 200;
        let mut x = vec![0.0; t_len];
        for v in &mut x[t_len - 5..] {
            *v = 1.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let causal: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
        let k = Kernel::from_causal(&causal).unwrap();
        let z = convolve(&TimeSeries::new(x).unwrap(), &k).unwrap();
        let leak: f64 = z.as_slice()[..t_len - 5].iter().map(|v| v * v).sum();
        assert!(leak < 1e-20, "leak {leak}");
    }

    #[test]
    fn projection_clamps() {
        let k = Kernel::new(vec![-1.0, 0.0, -3.0, 2.0]).unwrap();
        assert_eq!(project_causal_nonneg(&k).values(), &[0.0, 0.0, 0.0, 2.0]);
        let k = Kernel::new(vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(project_causal_nonneg(&k), k);
        let p = project_causal_nonneg(&Kernel::new(vec![5.0, 4.0, -0.0, 1.0]).unwrap());
        assert!(p.is_causal() && p.is_nonnegative());
        assert!(p.values().iter().all(|v| v.is_sign_positive()));
    }

    #[test]
    fn projection_is_nearest_feasible_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let len = 2 * rng.random_range(1..=4);
            let k = Kernel::new((0..len).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
            let p = project_causal_nonneg(&k);
            let dist = |v: &[f64]| -> f64 {
                k.values()
                    .iter()
                    .zip(v)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
            };
            let d_p = dist(p.values());
            for _ in 0..1000 {
                let mut v = vec![0.0; len];
                for e in &mut v[len / 2..] {
                    *e = rng.random_range(0.0..3.0);
                }
                assert!(d_p <= dist(&v) + 1e-15);
            }
        }
    }

    #[test]
    fn difference_of_constant_and_ramp() {
        let d = DifferenceOperator::new(6).unwrap();
        let c = Kernel::new(vec![2.5; 6]).unwrap();
        assert!(d.apply(&c).unwrap().iter().all(|&v| v == 0.0));
        let ramp = Kernel::new((0..6).map(|i| i as f64).collect()).unwrap();
        assert_eq!(d.apply(&ramp).unwrap(), vec![1.0; 5]);
        assert!(d.apply(&Kernel::zeros(4).unwrap()).is_err());
    }

    #[test]
    fn difference_norm_matches_direct_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = DifferenceOperator::new(30).unwrap();
        let applied: f64 = d.apply_slice(&v).unwrap().iter().map(|x| x * x).sum();
        let mut direct = 0.0;
        for j in 0..29 {
            direct += (v[j + 1] - v[j]) * (v[j + 1] - v[j]);
        }
        assert!((applied - direct).abs() <= 1e-12 * direct);
        assert!((DifferenceOperator::squared_norm(&v) - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn gram_matches_explicit_product() {
        let d = DifferenceOperator::new(7).unwrap();
        let m = d.to_matrix();
        let mut g = DMatrix::zeros(7, 7);
        d.add_scaled_gram(&mut g, 1.0);
        assert!((g - m.transpose() * &m).abs().max() < 1e-15);
    }

    proptest! {
        #[test]
        fn convolution_is_linear(
            seed in any::<u64>(),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = TimeSeries::new((0..40).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let k1: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let k2: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mix: Vec<f64> = k1.iter().zip(&k2).map(|(p, q)| a * p + b * q).collect();
            let conv = Convolver::new(&x, 10).unwrap();
            let z1 = conv.convolve_values(&k1);
            let z2 = conv.convolve_values(&k2);
            let zm = conv.convolve_values(&mix);
            let combo: Vec<f64> = z1.iter().zip(&z2).map(|(p, q)| a * p + b * q).collect();
            let scale = combo.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            let err = zm.iter().zip(&combo).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * scale);
        }

        #[test]
        fn projection_is_idempotent(values in proptest::collection::vec(-5.0f64..5.0, 1..20)) {
            let mut values = values;
            if values.len() % 2 == 1 {
                values.push(0.5);
            }
            let p = project_causal_nonneg(&Kernel::new(values).unwrap());
            prop_assert_eq!(project_causal_nonneg(&p), p.clone());
            prop_assert!(p.is_causal() && p.is_nonnegative());
        }

        #[test]
        fn matrix_and_matrix_free_difference_agree(values in proptest::collection::vec(-5.0f64..5.0, 2..30)) {
            let d = DifferenceOperator::new(values.len()).unwrap();
            let explicit = d.to_matrix() * nalgebra::DVector::from_vec(values.clone());
            let free = d.apply_slice(&values).unwrap();
            for (p, q) in explicit.iter().zip(&free) {
                prop_assert!((p - q).abs() <= 1e-12);
            }
        }
    }
}
