//! Estimation of smooth, positive and causal impulse responses (water
//! residence times) from paired rainfall / aquifer-level series.
//!
//! The crate is organised bottom-up:
//!
//! * [`signals`] holds the series and kernel types, linear convolution,
//!   the constraint projection and the first-difference operator.
//! * [`synth`] generates synthetic benchmark scenarios (multifractal
//!   rainfall, Beta-shaped kernels, calibrated Gaussian noise).
//! * [`solver`] is the alternating-minimization / projected Newton solver.
//! * [`baseline`] is the cross-correlation estimator used for comparison.
//! * [`select`] provides the quality metrics, regularization sweeps and
//!   the automatic selection strategies.

pub mod baseline;
pub mod error;
pub mod float_serde;
pub mod select;
pub mod signals;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use signals::{Convolver, DifferenceOperator, Kernel, TimeSeries};
pub use solver::{DeconvResult, Problem, SolverConfig};
