//! Alternating minimization of
//!
//! ```text
//! J(k, c) = 1/2 ||y - X k - c 1||^2 + lambda ||D k||^2
//! ```
//!
//! over causal nonnegative kernels `k` and a scalar offset `c`. The kernel
//! update is a projected Newton step with backtracking on the convex
//! combination between the incumbent and the unconstrained regularized
//! least-squares solution; the offset update is the closed-form mean of the
//! residual.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signals::{fft_len, project_values, Convolver, DifferenceOperator, Kernel, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Smoothness weight.
    pub lambda: f64,
    /// Backtracking stops once the step size falls below this floor.
    pub alpha_min: f64,
    /// Relative squared kernel change below which the solver stops.
    pub k_err_min: f64,
    /// Relative squared reconstruction change below which the solver stops.
    pub y_err_min: f64,
    /// Outer (alternation) iteration cap.
    pub s_max: usize,
    /// Backtracking iteration cap per outer iteration.
    pub t_max: usize,
    /// Step multiplier applied when the objective increases.
    pub shrink: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            alpha_min: 1e-6,
            k_err_min: 1e-8,
            y_err_min: 1e-8,
            s_max: 200,
            t_max: 100,
            shrink: 0.9,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return invalid(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return invalid(format!("shrink must lie in (0, 1), got {}", self.shrink));
        }
        if self.s_max == 0 || self.t_max == 0 {
            return invalid("iteration caps must be >= 1");
        }
        for (name, v) in [
            ("alpha_min", self.alpha_min),
            ("k_err_min", self.k_err_min),
            ("y_err_min", self.y_err_min),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Why the alternation stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    KernelTolerance,
    ReconstructionTolerance,
    StepFloor,
    OuterCap,
    InnerCap,
    /// Non-iterative estimator.
    ClosedForm,
}

impl StopReason {
    pub fn is_tolerance(self) -> bool {
        matches!(
            self,
            Self::KernelTolerance
                | Self::ReconstructionTolerance
                | Self::StepFloor
                | Self::ClosedForm
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeconvResult {
    pub k_est: Kernel,
    pub c_est: f64,
    pub y_rec: TimeSeries,
    /// Objective after each accepted update, starting from the zero kernel.
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn rel_sq_change(new: &[f64], old: &[f64]) -> f64 {
    let diff: f64 = new.iter().zip(old).map(|(a, b)| (a - b).powi(2)).sum();
    if diff == 0.0 {
        return 0.0;
    }
    let den = sq_norm(new);
    if den == 0.0 {
        f64::INFINITY
    } else {
        diff / den
    }
}

/// `sum_t a[t] * b[t - m]` for each `m` in `lags`, with `b` zero outside its range.
pub(crate) fn cross_correlation(a: &[f64], b: &[f64], lags: std::ops::Range<isize>) -> Vec<f64> {
    let max_lag = lags.start.unsigned_abs().max(lags.end.unsigned_abs());
    let n = fft_len(a.len().max(b.len()) + max_lag + 1);
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let load = |v: &[f64]| {
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for (c, &x) in buf.iter_mut().zip(v) {
            c.re = x;
        }
        buf
    };
    let mut fa = load(a);
    let mut fb = load(b);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (p, q) in fa.iter_mut().zip(&fb) {
        *p *= q.conj();
    }
    inverse.process(&mut fa);
    let scale = 1.0 / n as f64;
    lags.map(|m| fa[m.rem_euclid(n as isize) as usize].re * scale)
        .collect()
}

/// `X^T X` for the `T x K` linear-convolution operator of `x`.
///
/// The first row comes from an FFT correlation; the rest follows along the
/// diagonals, each step adding the entering product and removing the
/// leaving one.
pub(crate) fn gram_matrix(x: &[f64], kernel_len: usize) -> DMatrix<f64> {
    let t_len = x.len() as isize;
    let half = (kernel_len / 2) as isize;
    let at = |i: isize| -> f64 {
        if i >= 0 && i < t_len {
            x[i as usize]
        } else {
            0.0
        }
    };
    // G[0, b] = sum_{u >= K/2} x[u] x[u - b]
    let mut tail = x.to_vec();
    for v in tail.iter_mut().take(half as usize) {
        *v = 0.0;
    }
    let first_row = cross_correlation(&tail, x, 0..kernel_len as isize);

    let mut g = DMatrix::zeros(kernel_len, kernel_len);
    for (d, &start) in first_row.iter().enumerate() {
        let mut acc = start;
        g[(0, d)] = acc;
        g[(d, 0)] = acc;
        for a in 0..kernel_len - d - 1 {
            let la = a as isize - half;
            let lb = (a + d) as isize - half;
            acc += at(-1 - la) * at(-1 - lb) - at(t_len - 1 - la) * at(t_len - 1 - lb);
            g[(a + 1, a + d + 1)] = acc;
            g[(a + d + 1, a + 1)] = acc;
        }
    }
    g
}

/// Precomputed quantities shared by all solves on one `(x, y, K)` triple.
///
/// The Gram matrix does not depend on `lambda` or `c`, so a
/// regularization sweep assembles it once.
#[derive(Debug, Clone)]
pub struct Problem {
    conv: Convolver,
    y: Vec<f64>,
    diff: DifferenceOperator,
    gram: DMatrix<f64>,
}

impl Problem {
    pub fn new(x: &TimeSeries, y: &TimeSeries, kernel_len: usize) -> Result<Self> {
        if x.len() != y.len() {
            return invalid(format!(
                "input and output lengths differ ({} vs {})",
                x.len(),
                y.len()
            ));
        }
        let conv = Convolver::new(x, kernel_len)?;
        if kernel_len > 2 * x.len() {
            log::warn!(
                "kernel length {kernel_len} exceeds twice the series length {}: problem is under-determined",
                x.len()
            );
        }
        Ok(Self {
            gram: gram_matrix(x.as_slice(), kernel_len),
            diff: DifferenceOperator::new(kernel_len)?,
            conv,
            y: y.as_slice().to_vec(),
        })
    }

    pub fn kernel_len(&self) -> usize {
        self.conv.kernel_len()
    }

    pub fn series_len(&self) -> usize {
        self.y.len()
    }

    pub fn convolver(&self) -> &Convolver {
        &self.conv
    }

    pub fn output(&self) -> &[f64] {
        &self.y
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Factorizes `X^T X + lambda D^T D`.
    pub fn newton_system(&self, lambda: f64) -> Result<NewtonSystem> {
        let mut h = self.gram.clone();
        self.diff.add_scaled_gram(&mut h, lambda);
        let k = self.kernel_len();
        let chol = Cholesky::new(h).ok_or_else(|| {
            Error::NumericalFailure(format!(
                "normal matrix X^T X + lambda D^T D (K = {k}, lambda = {lambda:e}) is not positive definite; \
                 the input is too degenerate for this kernel length or lambda is too small"
            ))
        })?;
        Ok(NewtonSystem { chol, lambda })
    }

    /// Unconstrained minimizer of `J(., c)`: `H^{-1} X^T (y - c 1)`.
    pub fn newton_step(&self, system: &NewtonSystem, c: f64) -> Result<Vec<f64>> {
        let shifted: Vec<f64> = self.y.iter().map(|v| v - c).collect();
        let rhs = DVector::from_vec(self.conv.correlate(&shifted)?);
        let step = system.chol.solve(&rhs);
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "normal matrix (K = {}, lambda = {:e}) is numerically singular",
                self.kernel_len(),
                system.lambda
            )));
        }
        Ok(step.iter().copied().collect())
    }

    /// `1/2 ||y - x*k - c||^2 + lambda ||D k||^2`.
    pub fn objective(&self, k: &[f64], c: f64, lambda: f64) -> f64 {
        let z = self.conv.convolve_values(k);
        self.objective_with(&z, k, c, lambda)
    }

    fn objective_with(&self, xk: &[f64], k: &[f64], c: f64, lambda: f64) -> f64 {
        let fidelity: f64 = self
            .y
            .iter()
            .zip(xk)
            .map(|(y, z)| (y - z - c).powi(2))
            .sum();
        0.5 * fidelity + lambda * DifferenceOperator::squared_norm(k)
    }

    fn offset_for(&self, xk: &[f64]) -> f64 {
        mean(
            &self
                .y
                .iter()
                .zip(xk)
                .map(|(y, z)| y - z)
                .collect::<Vec<_>>(),
        )
    }

    pub fn solve(&self, config: &SolverConfig) -> Result<DeconvResult> {
        let zeros = vec![0.0; self.kernel_len()];
        self.run(config, &zeros, mean(&self.y), None)
    }

    /// Warm start from a feasible kernel `k0` and offset `c0`.
    pub fn solve_from(&self, config: &SolverConfig, k0: &Kernel, c0: f64) -> Result<DeconvResult> {
        if k0.len() != self.kernel_len() {
            return invalid(format!(
                "initial kernel length {} does not match {}",
                k0.len(),
                self.kernel_len()
            ));
        }
        let mut init = k0.values().to_vec();
        project_values(&mut init);
        self.run(config, &init, c0, None)
    }

    /// Runs at most `outer` alternations from a warm start (used to probe
    /// fixed points).
    pub fn iterate_from(
        &self,
        config: &SolverConfig,
        k0: &Kernel,
        c0: f64,
        outer: usize,
    ) -> Result<DeconvResult> {
        let mut init = k0.values().to_vec();
        project_values(&mut init);
        self.run(config, &init, c0, Some(outer))
    }

    fn run(
        &self,
        config: &SolverConfig,
        init: &[f64],
        c_init: f64,
        outer_limit: Option<usize>,
    ) -> Result<DeconvResult> {
        config.validate()?;
        let lambda = config.lambda;
        let system = self.newton_system(lambda)?;

        let mut k = init.to_vec();
        let mut c = c_init;
        let mut xk = self.conv.convolve_values(&k);
        let mut y_rec: Vec<f64> = xk.iter().map(|z| z + c).collect();
        let mut j_ref = self.objective_with(&xk, &k, c, lambda);
        ensure_finite(j_ref)?;
        let mut trace = vec![j_ref];

        let s_max = outer_limit.map_or(config.s_max, |l| l.min(config.s_max));
        let mut stop = StopReason::OuterCap;
        let mut outer = 0;
        let mut candidate = vec![0.0; k.len()];

        'outer: while outer < s_max {
            outer += 1;
            let newton = self.newton_step(&system, c)?;
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..config.t_max {
                for ((out, &old), &n) in candidate.iter_mut().zip(&k).zip(newton.iter()) {
                    *out = (1.0 - alpha) * old + alpha * n;
                }
                project_values(&mut candidate);
                let xc = self.conv.convolve_values(&candidate);
                let j = self.objective_with(&xc, &candidate, c, lambda);
                ensure_finite(j)?;
                if j <= j_ref {
                    accepted = Some((xc, j));
                    break;
                }
                // rejected, but indistinguishable from the incumbent
                if rel_sq_change(&candidate, &k) < config.k_err_min {
                    stop = StopReason::KernelTolerance;
                    break 'outer;
                }
                alpha *= config.shrink;
                if alpha < config.alpha_min {
                    stop = StopReason::StepFloor;
                    break 'outer;
                }
            }
            let Some((xc, j_accepted)) = accepted else {
                stop = StopReason::InnerCap;
                break;
            };

            let k_err = rel_sq_change(&candidate, &k);
            std::mem::swap(&mut k, &mut candidate);
            xk = xc;
            c = self.offset_for(&xk);
            let y_rec_new: Vec<f64> = xk.iter().map(|z| z + c).collect();
            let y_err = rel_sq_change(&y_rec_new, &y_rec);
            y_rec = y_rec_new;
            // exact offset step: J can only drop, up to rounding
            j_ref = self.objective_with(&xk, &k, c, lambda).min(j_accepted);
            ensure_finite(j_ref)?;
            trace.push(j_ref);

            if k_err < config.k_err_min {
                stop = StopReason::KernelTolerance;
                break;
            }
            if y_err < config.y_err_min {
                stop = StopReason::ReconstructionTolerance;
                break;
            }
        }

        Ok(DeconvResult {
            k_est: Kernel::new(k)?,
            c_est: c,
            y_rec: TimeSeries::new(y_rec)?,
            objective_trace: trace,
            outer_iterations: outer,
            converged: stop.is_tolerance(),
            stop_reason: stop,
        })
    }
}

fn ensure_finite(j: f64) -> Result<()> {
    if j.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericalFailure(format!(
            "objective became non-finite ({j})"
        )))
    }
}

/// Factorized `X^T X + lambda D^T D` for one value of `lambda`.
#[derive(Debug, Clone)]
pub struct NewtonSystem {
    chol: Cholesky<f64, Dyn>,
    lambda: f64,
}

impl NewtonSystem {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }
}

/// `(X^T X + lambda D^T D)^{-1} X^T y_hat`.
pub fn newton_step(
    x: &TimeSeries,
    y_hat: &TimeSeries,
    lambda: f64,
    kernel_len: usize,
) -> Result<Kernel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    let problem = Problem::new(x, y_hat, kernel_len)?;
    let system = problem.newton_system(lambda)?;
    Kernel::new(problem.newton_step(&system, 0.0)?)
}

/// Offset minimizing the objective for a fixed kernel: `mean(y - x*k)`.
pub fn estimate_c(y: &TimeSeries, x: &TimeSeries, k: &Kernel) -> Result<f64> {
    if x.len() != y.len() {
        return invalid("input and output lengths differ");
    }
    let xk = Convolver::new(x, k.len())?.convolve(k)?;
    Ok(mean(
        &y.as_slice()
            .iter()
            .zip(&xk)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    ))
}

pub fn evaluate_objective(
    x: &TimeSeries,
    y: &TimeSeries,
    k: &Kernel,
    c: f64,
    lambda: f64,
) -> Result<f64> {
    if x.len() != y.len() {
        return invalid("input and output lengths differ");
    }
    let xk = Convolver::new(x, k.len())?.convolve(k)?;
    let fidelity: f64 = y
        .as_slice()
        .iter()
        .zip(&xk)
        .map(|(a, b)| (a - b - c).powi(2))
        .sum();
    Ok(0.5 * fidelity + lambda * DifferenceOperator::squared_norm(k.values()))
}

pub fn run_am(
    x: &TimeSeries,
    y: &TimeSeries,
    kernel_len: usize,
    config: &SolverConfig,
) -> Result<DeconvResult> {
    Problem::new(x, y, kernel_len)?.solve(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_conv_matrix(x: &[f64], kernel_len: usize) -> DMatrix<f64> {
        let t_len = x.len() as isize;
        let half = (kernel_len / 2) as isize;
        DMatrix::from_fn(x.len(), kernel_len, |t, j| {
            let s = t as isize - (j as isize - half);
            if s >= 0 && s < t_len {
                x[s as usize]
            } else {
                0.0
            }
        })
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn gram_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (t_len, k_len) in [(16, 8), (30, 16), (5, 12), (40, 2)] {
            let x = random_vec(&mut rng, t_len);
            let dense = dense_conv_matrix(&x, k_len);
            let expected = dense.transpose() * &dense;
            let got = gram_matrix(&x, k_len);
            assert!((got - &expected).abs().max() < 1e-12, "T={t_len} K={k_len}");
        }
    }

    #[test]
    fn newton_step_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_vec(&mut rng, 16);
        let y = random_vec(&mut rng, 16);
        let lambda = 3.7;
        let xm = dense_conv_matrix(&x, 8);
        let d = DifferenceOperator::new(8).unwrap().to_matrix();
        let h = xm.transpose() * &xm + d.transpose() * &d * lambda;
        let rhs = xm.transpose() * DVector::from_vec(y.clone());
        let expected = h.lu().solve(&rhs).unwrap();
        let got = newton_step(
            &TimeSeries::new(x).unwrap(),
            &TimeSeries::new(y).unwrap(),
            lambda,
            8,
        )
        .unwrap();
        let err = (DVector::from_column_slice(got.values()) - &expected).norm() / expected.norm();
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn newton_step_of_zero_rhs_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = TimeSeries::new(random_vec(&mut rng, 20)).unwrap();
        let y = TimeSeries::new(vec![0.0; 20]).unwrap();
        let k = newton_step(&x, &y, 1.0, 6).unwrap();
        assert!(k.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn newton_step_recovers_smooth_kernel_without_regularization() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let x = TimeSeries::new(random_vec(&mut rng, 200)).unwrap();
        let k0 = Kernel::new(
            (0..10)
                .map(|j| (-((j as f64 - 6.0).powi(2)) / 4.0).exp())
                .collect(),
        )
        .unwrap();
        let y = crate::signals::convolve(&x, &k0).unwrap();
        let k = newton_step(&x, &y, 1e-12, 10).unwrap();
        let err: f64 = k
            .values()
            .iter()
            .zip(k0.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / k0.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn singular_system_is_reported() {
        let x = TimeSeries::new(vec![0.0; 10]).unwrap();
        let y = TimeSeries::new(vec![1.0; 10]).unwrap();
        let err = newton_step(&x, &y, 0.0, 4).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure(_)), "{err}");
    }

    #[test]
    fn estimate_c_cases() {
        let x = TimeSeries::new(vec![1.0, 0.0, 2.0, 0.5, 0.0, 3.0]).unwrap();
        let y = TimeSeries::new(vec![42.0; 6]).unwrap();
        assert_eq!(
            estimate_c(&y, &x, &Kernel::zeros(4).unwrap()).unwrap(),
            42.0
        );

        let k = Kernel::from_causal(&[0.5, 0.25]).unwrap();
        let clean = crate::signals::convolve(&x, &k).unwrap();
        let y = TimeSeries::new(clean.as_slice().iter().map(|v| v + 7.5).collect()).unwrap();
        assert!((estimate_c(&y, &x, &k).unwrap() - 7.5).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let xs = random_vec(&mut rng, 25);
        let ys = random_vec(&mut rng, 25);
        let k = Kernel::new(random_vec(&mut rng, 6)).unwrap();
        let dense = dense_conv_matrix(&xs, 6) * DVector::from_column_slice(k.values());
        let mut total = 0.0;
        for t in 0..25 {
            total += ys[t] - dense[t];
        }
        let got = estimate_c(
            &TimeSeries::new(ys).unwrap(),
            &TimeSeries::new(xs).unwrap(),
            &k,
        )
        .unwrap();
        assert!((got - total / 25.0).abs() < 1e-12);
    }

    #[test]
    fn objective_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let xs = random_vec(&mut rng, 30);
        let ys = random_vec(&mut rng, 30);
        let x = TimeSeries::new(xs.clone()).unwrap();
        let y = TimeSeries::new(ys.clone()).unwrap();

        let m = mean(&ys);
        let expected: f64 = 0.5 * ys.iter().map(|v| (v - m).powi(2)).sum::<f64>();
        let got = evaluate_objective(&x, &y, &Kernel::zeros(8).unwrap(), m, 2.0).unwrap();
        assert!((got - expected).abs() < 1e-12);

        let k = Kernel::new(random_vec(&mut rng, 8)).unwrap();
        let lambda = 0.3;
        let resid = DVector::from_vec(ys)
            - dense_conv_matrix(&xs, 8) * DVector::from_column_slice(k.values())
            - DVector::from_element(30, 1.25);
        let dk = DifferenceOperator::new(8).unwrap().to_matrix()
            * DVector::from_column_slice(k.values());
        let dense = 0.5 * resid.norm_squared() + lambda * dk.norm_squared();
        let got = evaluate_objective(&x, &y, &k, 1.25, lambda).unwrap();
        assert!((got - dense).abs() <= 1e-10 * dense);

        let k = Kernel::from_causal(&[0.2, 0.5, 0.3]).unwrap();
        let y = TimeSeries::new(
            crate::signals::convolve(&x, &k)
                .unwrap()
                .as_slice()
                .iter()
                .map(|v| v + 3.0)
                .collect(),
        )
        .unwrap();
        let reg = DifferenceOperator::squared_norm(k.values());
        let got = evaluate_objective(&x, &y, &k, 3.0, 0.7).unwrap();
        assert!((got - 0.7 * reg).abs() < 1e-12);
    }

    #[test]
    fn constant_output_gives_zero_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = TimeSeries::new((0..64).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap();
        let y = TimeSeries::new(vec![5.5; 64]).unwrap();
        let r = run_am(&x, &y, 16, &SolverConfig::with_lambda(1.0)).unwrap();
        assert!(r.k_est.values().iter().all(|&v| v == 0.0));
        assert!((r.c_est - 5.5).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn invalid_config_rejected() {
        let x = TimeSeries::new(vec![1.0; 8]).unwrap();
        let bad = SolverConfig {
            shrink: 1.0,
            ..SolverConfig::default()
        };
        assert!(run_am(&x, &x, 4, &bad).is_err());
        let bad = SolverConfig {
            lambda: -1.0,
            ..SolverConfig::default()
        };
        assert!(run_am(&x, &x, 4, &bad).is_err());
        assert!(run_am(
            &x,
            &TimeSeries::new(vec![1.0; 7]).unwrap(),
            4,
            &SolverConfig::default()
        )
        .is_err());
    }
}
