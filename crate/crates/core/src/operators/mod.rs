//! Finite-dimensional power-bounded operators: orbit norms `‖Tⁿ(I−T)‖`,
//! boundary resolvent norms, derivatives of the boundary function, and
//! monotone resolvent envelopes.
//!
//! Diagonal and spectral-curve operators are normal, so every norm reduces
//! to a maximum over eigenvalues. Dense and shift operators go through the
//! matrix routines in [`matrix`].

pub mod envelope;
pub mod matrix;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use envelope::{fit_envelope, ResolventProfile};
pub use matrix::{operator_norm, CMatrix};

use crate::analysis::slope::fit_log_log;
use crate::rates::RateError;
use crate::scalar::{logspace, Real};

/// Distance to the spectrum below which a resolvent is treated as singular.
pub const SINGULARITY_GUARD: f64 = 1e-14;
/// Growth exponent of `‖Tⁿ‖` above which an operator is flagged as not power-bounded.
pub const POWER_GROWTH_LIMIT: f64 = 0.1;
/// Slack allowed on `|λ| ≤ 1` when validating eigenvalues.
const MODULUS_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("invalid operator: {0}")]
    Input(String),
    #[error("e^(i theta) lies on the spectrum at theta = {theta}")]
    Singular { theta: f64 },
    #[error("orbit diverged (non-finite norm) at n = {step}")]
    Divergent { step: usize },
    #[error(transparent)]
    Rate(#[from] RateError),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

fn default_theta_min() -> f64 {
    1e-4
}

fn default_theta_max() -> f64 {
    1.0
}

/// Serializable description of an operator. Complex numbers are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum OperatorSpec {
    Dense {
        entries: Vec<Vec<[f64; 2]>>,
    },
    Diagonal {
        eigenvalues: Vec<[f64; 2]>,
        /// Permit the eigenvalue `1` itself.
        #[serde(default)]
        allow_one: bool,
    },
    /// Eigenvalues `(1 − θ_j^α) e^{iθ_j}` on a log-spaced grid of `n` angles.
    SpectralCurve {
        alpha: f64,
        n: usize,
        #[serde(default = "default_theta_min")]
        theta_min: f64,
        #[serde(default = "default_theta_max")]
        theta_max: f64,
    },
    /// `n × n` truncated weighted shift `e_i ↦ w_i e_{i+1}`; a single weight
    /// is repeated, otherwise exactly `n − 1` weights are required.
    Shift {
        weights: Vec<f64>,
        n: usize,
    },
}

impl OperatorSpec {
    pub fn diagonal(eigenvalues: &[Complex<f64>]) -> Self {
        Self::Diagonal { eigenvalues: eigenvalues.iter().map(|z| [z.re, z.im]).collect(), allow_one: false }
    }

    pub fn diagonal_real(eigenvalues: &[f64]) -> Self {
        Self::Diagonal { eigenvalues: eigenvalues.iter().map(|&x| [x, 0.0]).collect(), allow_one: false }
    }

    pub fn spectral_curve(alpha: f64, n: usize) -> Self {
        Self::SpectralCurve { alpha, n, theta_min: default_theta_min(), theta_max: default_theta_max() }
    }

    /// The model `Diagonal{λ_j = 1 − j/N, j = 1..N}`.
    pub fn linear_ladder(n: usize) -> Self {
        let eig: Vec<f64> = (1..=n).map(|j| 1.0 - j as f64 / n as f64).collect();
        Self::diagonal_real(&eig)
    }

    /// Validate and materialize.
    pub fn build<T: Real>(&self) -> Result<Operator<T>> {
        let c = |p: &[f64; 2]| Complex::new(T::lit(p[0]), T::lit(p[1]));
        match self {
            Self::Dense { entries } => {
                let rows: Vec<Vec<Complex<T>>> = entries.iter().map(|r| r.iter().map(c).collect()).collect();
                let m =
                    CMatrix::from_rows(&rows).ok_or_else(|| OperatorError::Input("dense entries must be a non-empty rectangular array".into()))?;
                if !m.is_square() {
                    return Err(OperatorError::Input(format!("dense operator must be square, got {}x{}", m.rows(), m.cols())));
                }
                if !m.is_finite() {
                    return Err(OperatorError::Input("dense entries must be finite".into()));
                }
                Ok(Operator::Matrix(m))
            }
            Self::Diagonal { eigenvalues, allow_one } => {
                if eigenvalues.is_empty() {
                    return Err(OperatorError::Input("diagonal operator needs at least one eigenvalue".into()));
                }
                let eig: Vec<Complex<T>> = eigenvalues.iter().map(c).collect();
                for (p, z) in eigenvalues.iter().zip(&eig) {
                    if !(p[0].is_finite() && p[1].is_finite()) {
                        return Err(OperatorError::Input("eigenvalues must be finite".into()));
                    }
                    if z.norm() > T::one() + T::lit(MODULUS_SLACK) {
                        return Err(OperatorError::Input(format!("eigenvalue {z} has modulus > 1")));
                    }
                    if !allow_one && p[0] == 1.0 && p[1] == 0.0 {
                        return Err(OperatorError::Input("eigenvalue 1 requires \"allow_one\": true".into()));
                    }
                }
                Ok(Operator::Normal(eig))
            }
            Self::SpectralCurve { alpha, n, theta_min, theta_max } => {
                if !(*alpha >= 1.0 && alpha.is_finite()) {
                    return Err(OperatorError::Input(format!("spectral curve needs alpha >= 1, got {alpha}")));
                }
                if *n == 0 {
                    return Err(OperatorError::Input("spectral curve needs n >= 1".into()));
                }
                if !(*theta_min > 0.0 && theta_min <= theta_max && *theta_max <= 1.0) {
                    return Err(OperatorError::Input(format!(
                        "spectral curve needs 0 < theta_min <= theta_max <= 1, got [{theta_min}, {theta_max}]"
                    )));
                }
                let alpha = T::lit(*alpha);
                let eig = logspace(T::lit(*theta_min), T::lit(*theta_max), *n)
                    .into_iter()
                    .map(|th| Complex::from_polar(T::one() - th.powf(alpha), th))
                    .collect();
                Ok(Operator::Normal(eig))
            }
            Self::Shift { weights, n } => {
                if *n == 0 {
                    return Err(OperatorError::Input("shift needs n >= 1".into()));
                }
                let w: Vec<f64> = match weights.len() {
                    1 => vec![weights[0]; n - 1],
                    l if l + 1 == *n => weights.clone(),
                    l => return Err(OperatorError::Input(format!("shift of size {n} needs 1 or {} weights, got {l}", n - 1))),
                };
                if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
                    return Err(OperatorError::Input(format!("shift weight {bad} outside (0, 1]")));
                }
                let mut m = CMatrix::zeros(*n, *n);
                for (i, &x) in w.iter().enumerate() {
                    m[(i + 1, i)] = Complex::new(T::lit(x), T::zero());
                }
                Ok(Operator::Matrix(m))
            }
        }
    }
}

/// A materialized operator.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator<T> {
    /// Normal operator given by its eigenvalues.
    Normal(Vec<Complex<T>>),
    Matrix(CMatrix<T>),
}

/// Result of [`Operator::power_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBound<T> {
    /// `max_{0≤n≤n_max} ‖Tⁿ‖`.
    pub bound: T,
    /// Log-log growth exponent of `‖Tⁿ‖` over the last decade of the window.
    pub growth_exponent: T,
    pub bounded: bool,
}

/// `d_n = ‖Tⁿ(I−T)‖` for `n = start, start+1, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSeries<T> {
    pub start: u64,
    pub values: Vec<T>,
    /// `sup_{n ≤ n_max} ‖Tⁿ‖`.
    pub power_bound: T,
}

impl<T: Real> OrbitSeries<T> {
    pub fn get(&self, n: u64) -> Option<T> {
        n.checked_sub(self.start).and_then(|i| self.values.get(i as usize).copied())
    }

    pub fn end(&self) -> u64 {
        self.start + self.values.len() as u64
    }
}

fn unit<T: Real>(theta: T) -> Complex<T> {
    Complex::from_polar(T::one(), theta)
}

fn factorial<T: Real>(k: u32) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::lit(f64::from(i)))
}

impl<T: Real> Operator<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Normal(e) => e.len(),
            Self::Matrix(m) => m.rows(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        match self {
            Self::Normal(e) => CMatrix::diagonal(e),
            Self::Matrix(m) => m.clone(),
        }
    }

    /// Dense view of the same operator, for cross-checking closed forms.
    pub fn as_dense(&self) -> Self {
        Self::Matrix(self.to_matrix())
    }

    /// `max_{0≤n≤n_max} ‖Tⁿ‖`, with a growth flag for non-power-bounded input.
    pub fn power_bound(&self, n_max: u64) -> Result<PowerBound<T>> {
        if n_max == 0 {
            return Err(OperatorError::Input("n_max must be >= 1".into()));
        }
        let norms: Vec<T> = match self {
            Self::Normal(e) => {
                let r = e.iter().map(|z| z.norm()).fold(T::zero(), T::max);
                (0..=n_max).map(|n| r.powf(T::from_u64(n).expect("u64"))).collect()
            }
            Self::Matrix(m) => {
                let mut p = CMatrix::identity(m.rows());
                let mut out = Vec::with_capacity(n_max as usize + 1);
                for n in 0..=n_max {
                    if n > 0 {
                        p = m.mul(&p);
                    }
                    match operator_norm(&p) {
                        Some(v) if v.is_finite() => out.push(v),
                        _ => return Err(OperatorError::Divergent { step: n as usize }),
                    }
                }
                out
            }
        };
        let bound = norms.iter().copied().fold(T::zero(), T::max);
        let lo = (n_max / 10).max(1);
        let pts = (lo..=n_max).map(|n| (T::from_u64(n).expect("u64"), norms[n as usize])).filter(|p| p.1 > T::zero());
        let growth_exponent = fit_log_log(pts).map(|f| f.0).unwrap_or(T::neg_infinity());
        Ok(PowerBound { bound, growth_exponent, bounded: growth_exponent <= T::lit(POWER_GROWTH_LIMIT) })
    }

    /// `d_n = ‖Tⁿ(I−T)‖` for `0 ≤ n ≤ n_max`.
    pub fn orbit_decay(&self, n_max: u64) -> Result<OrbitSeries<T>> {
        if n_max == 0 {
            return Err(OperatorError::Input("n_max must be >= 1".into()));
        }
        match self {
            Self::Normal(e) => {
                let terms: Vec<(T, T)> = e.iter().map(|z| (z.norm(), (Complex::new(T::one(), T::zero()) - z).norm())).collect();
                let values: Vec<T> = (0..=n_max)
                    .into_par_iter()
                    .map(|n| {
                        let n = n as i32;
                        terms.iter().map(|&(r, g)| r.powi(n) * g).fold(T::zero(), T::max)
                    })
                    .collect();
                let r = terms.iter().map(|t| t.0).fold(T::zero(), T::max);
                Ok(OrbitSeries { start: 0, values, power_bound: r.max(T::one()) })
            }
            Self::Matrix(m) => {
                let one = Complex::new(T::one(), T::zero());
                let id = CMatrix::identity(m.rows());
                let mut x = id.lincomb(one, m, -one);
                let mut pow = id;
                let mut values = Vec::with_capacity(n_max as usize + 1);
                let mut bound = T::one();
                for n in 0..=n_max {
                    if n > 0 {
                        x = m.mul(&x);
                        pow = m.mul(&pow);
                        bound = bound.max(operator_norm(&pow).unwrap_or(T::infinity()));
                    }
                    match operator_norm(&x) {
                        Some(v) if v.is_finite() => values.push(v),
                        _ => return Err(OperatorError::Divergent { step: n as usize }),
                    }
                }
                if !bound.is_finite() {
                    return Err(OperatorError::Divergent { step: n_max as usize });
                }
                Ok(OrbitSeries { start: 0, values, power_bound: bound })
            }
        }
    }

    /// `(e^{iθ} I − T)^{-1}` as a dense matrix.
    fn resolvent_matrix(&self, theta: T) -> Result<CMatrix<T>> {
        let lambda = unit(theta);
        let m = self.to_matrix();
        let shifted = CMatrix::identity(m.rows()).lincomb(lambda, &m, -Complex::new(T::one(), T::zero()));
        shifted.inverse().filter(|inv| inv.is_finite()).ok_or(OperatorError::Singular { theta: theta.to_f64_lossy() })
    }

    fn nearest_eigen_distance(eig: &[Complex<T>], lambda: Complex<T>) -> T {
        eig.iter().map(|z| (lambda - z).norm()).fold(T::infinity(), T::min)
    }

    /// `‖R(e^{iθ}, T)‖`.
    pub fn resolvent_norm(&self, theta: T) -> Result<T> {
        let guard = T::lit(SINGULARITY_GUARD);
        let singular = OperatorError::Singular { theta: theta.to_f64_lossy() };
        match self {
            Self::Normal(e) => {
                let d = Self::nearest_eigen_distance(e, unit(theta));
                if d < guard {
                    Err(singular)
                } else {
                    Ok(d.recip())
                }
            }
            Self::Matrix(_) => {
                let inv = self.resolvent_matrix(theta)?;
                match operator_norm(&inv) {
                    Some(v) if v.is_finite() && v < guard.recip() => Ok(v),
                    _ => Err(singular),
                }
            }
        }
    }

    /// Angles where `‖R(e^{iθ},T)‖ > threshold / |θ|`, in grid order.
    /// Angles where the resolvent is singular are always flagged; `θ = 0` is skipped.
    pub fn singularity_scan(&self, grid: &[T], threshold: T) -> Vec<T> {
        let flags: Vec<Option<T>> = grid
            .par_iter()
            .map(|&th| {
                if th == T::zero() || th.abs() > T::PI() {
                    return None;
                }
                match self.resolvent_norm(th) {
                    Ok(v) if v <= threshold / th.abs() => None,
                    _ => Some(th),
                }
            })
            .collect();
        flags.into_iter().flatten().collect()
    }

    /// `‖F^{(k)}(e^{iθ})‖` for the orbit boundary function
    /// `F(λ) = (I−T)R(λ,T)`, via `F^{(k)} = (−1)^k k! R^k (I + (1−λ)R)`.
    pub fn boundary_derivative_norm(&self, k: u32, theta: T) -> Result<T> {
        let lambda = unit(theta);
        let one = Complex::new(T::one(), T::zero());
        let kf = factorial::<T>(k);
        match self {
            Self::Normal(e) => {
                if Self::nearest_eigen_distance(e, lambda) < T::lit(SINGULARITY_GUARD) {
                    return Err(OperatorError::Singular { theta: theta.to_f64_lossy() });
                }
                let v = e
                    .iter()
                    .map(|mu| {
                        let r = (lambda - mu).inv();
                        r.norm().powi(k as i32) * (one + (one - lambda) * r).norm()
                    })
                    .fold(T::zero(), T::max);
                Ok(kf * v)
            }
            Self::Matrix(_) => {
                let r = self.resolvent_matrix(theta)?;
                let id = CMatrix::identity(r.rows());
                let mut p = id.lincomb(one, &r, one - lambda);
                for _ in 0..k {
                    p = r.mul(&p);
                }
                let v = operator_norm(&p).ok_or(OperatorError::Singular { theta: theta.to_f64_lossy() })?;
                Ok(kf * v)
            }
        }
    }

    /// Resolvent norms on `grid` (ordered by θ) plus their fitted envelope.
    pub fn profile(&self, grid: &[T]) -> Result<ResolventProfile<T>> {
        let mut grid: Vec<T> = grid.to_vec();
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        let samples: Vec<(T, T)> = grid.par_iter().map(|&th| self.resolvent_norm(th).map(|v| (th, v))).collect::<Result<_>>()?;
        let envelope = fit_envelope(&samples)?;
        Ok(ResolventProfile { samples, envelope })
    }
}
