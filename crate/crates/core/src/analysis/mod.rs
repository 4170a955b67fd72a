//! End-to-end certification of predicted against observed decay.
//!
//! The pipeline checks the theorem's hypotheses on a finite window, builds a
//! resolvent envelope `m`, schedules `ε_n = m_log^{-1}(cn)`, fits one
//! multiplicative constant on a calibration window and tests the bound on a
//! disjoint validation window. Verdicts are evidence on a window, not proofs.

mod certify;
mod hypotheses;
pub mod slope;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certify::{certify_decay, certify_operator, certify_sequence, certify_series, DecayReport, DecayVerdict, SeriesCertificate};
pub use hypotheses::{check_hypotheses, Check, HypothesisReport, Subject};
pub use slope::{slope_estimate, SlopeFit};

use crate::kernels::KernelError;
use crate::operators::OperatorError;
use crate::rates::{predicted_bound_at, RateError, RateFunction, Regime};
use crate::scalar::Real;

pub const DEFAULT_C: f64 = 0.5;
pub const DEFAULT_CALIB: (u64, u64) = (50, 100);
pub const DEFAULT_VALID: (u64, u64) = (101, 1000);
pub const DEFAULT_SLOPE_WINDOW: (u64, u64) = (100, 1000);
/// Envelope and scan grid: this many log-spaced angles on each side of 0.
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_THETA_MIN: f64 = 1e-5;
/// A scan flags `θ` when the resolvent (or `|G|`) exceeds `threshold / |θ|`.
pub const DEFAULT_SCAN_THRESHOLD: f64 = 10.0;
pub const DEFAULT_HYPOTHESIS_WINDOW: u64 = 1000;
/// Windows shorter than this give inconclusive verdicts.
pub const MIN_HYPOTHESIS_WINDOW: u64 = 100;
/// Log-log growth of `sup_{k≤n} ‖s_k‖` above which partial sums count as unbounded.
pub const PARTIAL_SUM_GROWTH_LIMIT: f64 = 0.1;
/// Highest derivative order used when fitting the derivative-domination constant.
pub const DOM_FUN_K_MAX: u32 = 5;
/// Radius offset `r = 1 + δ` for Abel means of a sequence's transform.
pub const ABEL_DELTA: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("certification refused: {hypothesis}")]
    Refused { hypothesis: String },
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnWindow,
    Fails,
    Inconclusive,
}

/// Parameters of a certification run; serialized into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AnalysisConfig<T> {
    pub c: T,
    pub calib: (u64, u64),
    pub valid: (u64, u64),
    pub slope_window: (u64, u64),
    pub grid: usize,
    pub theta_min: T,
    pub theta_max: T,
    pub scan_threshold: T,
    pub hypothesis_window: u64,
}

impl<T: Real> Default for AnalysisConfig<T> {
    fn default() -> Self {
        Self {
            c: T::lit(DEFAULT_C),
            calib: DEFAULT_CALIB,
            valid: DEFAULT_VALID,
            slope_window: DEFAULT_SLOPE_WINDOW,
            grid: DEFAULT_GRID,
            theta_min: T::lit(DEFAULT_THETA_MIN),
            theta_max: T::PI(),
            scan_threshold: T::lit(DEFAULT_SCAN_THRESHOLD),
            hypothesis_window: DEFAULT_HYPOTHESIS_WINDOW,
        }
    }
}

impl<T: Real> AnalysisConfig<T> {
    pub fn with_windows(c: T, calib: (u64, u64), valid: (u64, u64)) -> Self {
        Self { c, calib, valid, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        Regime::Smooth.check_c(self.c)?;
        let (a, b) = self.calib;
        let (v0, v1) = self.valid;
        if a == 0 || a > b {
            return Err(AnalysisError::Input(format!("calibration window [{a}, {b}] must satisfy 1 <= a <= b")));
        }
        if v0 <= b || v0 > v1 {
            return Err(AnalysisError::Input(format!(
                "validation window [{v0}, {v1}] must lie strictly to the right of calibration window [{a}, {b}]"
            )));
        }
        if self.grid < 2 {
            return Err(AnalysisError::Input("grid needs at least 2 points".into()));
        }
        if !(self.theta_min > T::zero() && self.theta_min < self.theta_max && self.theta_max <= T::PI()) {
            return Err(AnalysisError::Input(format!(
                "theta range [{}, {}] must satisfy 0 < theta_min < theta_max <= pi",
                self.theta_min, self.theta_max
            )));
        }
        if !(self.scan_threshold > T::zero()) {
            return Err(AnalysisError::Input("scan threshold must be positive".into()));
        }
        Ok(())
    }

    /// Positive and negative log-spaced angles, sorted by θ.
    pub fn angle_grid(&self) -> Vec<T> {
        let pos = crate::scalar::logspace(self.theta_min, self.theta_max, self.grid);
        let mut out: Vec<T> = pos.iter().rev().map(|&t| -t).collect();
        out.extend(pos);
        out
    }
}

/// `ε_n` for each target `cn`, `None` where `cn` is below the derived rate's
/// range (pre-asymptotic). `n` may be fractional.
pub fn epsilon_schedule<T: Real>(m: &RateFunction<T>, regime: Regime, c: T, n_list: &[T]) -> Result<Vec<Option<T>>> {
    regime.check_c(c)?;
    n_list
        .iter()
        .map(|&n| {
            if !(n > T::zero()) {
                return Err(AnalysisError::Input(format!("schedule index n = {n} must be positive")));
            }
            Ok(predicted_bound_at(m, regime, c * n, n)?.epsilon())
        })
        .collect()
}
