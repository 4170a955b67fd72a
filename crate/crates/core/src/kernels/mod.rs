//! Smoothing kernels behind the quantified Tauberian estimate.
//!
//! A cutoff `ψ_ε` vanishes on `|θ| ≤ ε` and equals 1 on `2ε ≤ |θ| ≤ π`.
//! Its Fourier coefficients `y^ε_n = (1/2π) ∫ e^{inθ} ψ_ε(θ) dθ` define the
//! smoothed sequence `x^ε = x ∗ y^ε`, and the complementary sequence
//! `z^ε = δ_0 − y^ε` carries the low-frequency remainder `x − x^ε = x ∗ z^ε`.
//!
//! Two cutoffs are provided. [`CutoffKind::Smooth`] uses a C^∞ ramp and is
//! the one to differentiate under the integral; [`CutoffKind::PiecewiseLinear`]
//! has closed-form coefficients
//!
//! ```text
//! y_0 = 1 − 3ε/(2π),   y_n = (cos 2nε − cos nε) / (επn²)
//! ```
//!
//! and differences `z_n − z_{n−1} = ε ∫_{ε(n−1)}^{εn} φ(t) dt`.

pub mod coeffs;
mod convolve;
pub mod cutoff;
pub mod selftest;
mod sequence;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coeffs::{coefficient_bounds_check, CoefficientBounds};
pub use convolve::{approximation_gap, convolve, smooth_decay_budget, spectral_form, Convolution, SPECTRAL_FORM_TOL};
pub use cutoff::phi;
pub use sequence::{BoundarySampler, Sequence, Shape};

use crate::quad::{integrate, integrate_piecewise, QuadOptions};
use crate::rates::RateError;
use crate::scalar::Real;

/// Accuracy of quadrature-computed smooth-cutoff coefficients.
pub const COEFF_QUAD_TOL: f64 = 1e-10;
/// Accuracy of the `φ` integral in [`z_diff_identity`].
pub const PHI_QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("epsilon = {0} outside (0, pi/2]")]
    Domain(f64),
    #[error("coefficient index {index} beyond the table (N_coeff = {n_coeff})")]
    Range { index: i64, n_coeff: usize },
    #[error("truncation bound {bound:e} exceeds tolerance {tol:e}; use N_coeff >= {required}")]
    Tolerance { bound: f64, tol: f64, required: usize },
    #[error("exact coefficient check supports n <= 100 and k <= 20, got n = {n}, k = {k}")]
    ExactRange { n: u64, k: u64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Rate(#[from] RateError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    Smooth,
    PiecewiseLinear,
}

/// A cutoff `ψ_ε` together with its coefficient table `y^ε_n`, `|n| ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelFamily<T> {
    kind: CutoffKind,
    eps: T,
    /// `y[n]` for `0 ≤ n ≤ N`; the table is even in `n`.
    y: Vec<T>,
}

/// Default truncation `⌈100/ε⌉`.
pub fn default_n_coeff<T: Real>(eps: T) -> usize {
    (T::lit(100.0) / eps).ceil().to_usize().unwrap_or(usize::MAX)
}

/// Closed-form coefficient of the piecewise-linear cutoff.
pub fn linear_coeff<T: Real>(eps: T, n: i64) -> T {
    if n == 0 {
        return T::one() - T::lit(1.5) * eps / T::PI();
    }
    let nf = T::from_i64_lossy(n);
    ((T::two() * nf * eps).cos() - (nf * eps).cos()) / (eps * T::PI() * nf * nf)
}

fn smooth_coeff<T: Real>(eps: T, n: i64) -> T {
    let two_eps = eps + eps;
    let nf = T::from_i64_lossy(n);
    // plateau 2ε ≤ θ ≤ π integrated exactly
    let plateau = if n == 0 { T::PI() - two_eps } else { -(nf * two_eps).sin() / nf };
    let opts = QuadOptions::oscillatory(T::lit(COEFF_QUAD_TOL) * T::PI(), n);
    let ramp = integrate(|th: T| (nf * th).cos() * cutoff::psi_smooth(eps, th), eps, two_eps, opts);
    (plateau + ramp.value) / T::PI()
}

impl<T: Real> KernelFamily<T> {
    /// Build with `n_coeff` coefficients on each side (default `⌈100/ε⌉`).
    pub fn new(kind: CutoffKind, eps: T, n_coeff: Option<usize>) -> Result<Self> {
        if !(eps > T::zero() && eps <= T::FRAC_PI_2() * (T::one() + T::epsilon())) {
            return Err(KernelError::Domain(eps.to_f64_lossy()));
        }
        let n = n_coeff.unwrap_or_else(|| default_n_coeff(eps));
        let y = match kind {
            CutoffKind::PiecewiseLinear => (0..=n as i64).into_par_iter().map(|k| linear_coeff(eps, k)).collect(),
            CutoffKind::Smooth => (0..=n as i64).into_par_iter().map(|k| smooth_coeff(eps, k)).collect(),
        };
        Ok(Self { kind, eps, y })
    }

    pub fn piecewise_linear(eps: T, n_coeff: Option<usize>) -> Result<Self> {
        Self::new(CutoffKind::PiecewiseLinear, eps, n_coeff)
    }

    pub fn smooth(eps: T, n_coeff: Option<usize>) -> Result<Self> {
        Self::new(CutoffKind::Smooth, eps, n_coeff)
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn n_coeff(&self) -> usize {
        self.y.len() - 1
    }

    pub fn psi(&self, theta: T) -> T {
        match self.kind {
            CutoffKind::PiecewiseLinear => cutoff::psi_linear(self.eps, theta),
            CutoffKind::Smooth => cutoff::psi_smooth(self.eps, theta),
        }
    }

    /// `y^ε_n`.
    pub fn coeff(&self, n: i64) -> Result<T> {
        self.y.get(n.unsigned_abs() as usize).copied().ok_or(KernelError::Range { index: n, n_coeff: self.n_coeff() })
    }

    /// `z^ε_n = δ_{n0} − y^ε_n`.
    pub fn z(&self, n: i64) -> Result<T> {
        let y = self.coeff(n)?;
        Ok(if n == 0 { T::one() - y } else { -y })
    }

    /// Coefficient table for `0 ≤ n ≤ N`.
    pub fn table(&self) -> &[T] {
        &self.y
    }

    /// Total variation of `ψ_ε'` on `[0, π]`; gives `|y_m| ≤ V/(π m²)`.
    pub fn derivative_variation(&self) -> T {
        match self.kind {
            CutoffKind::PiecewiseLinear => T::two() / self.eps,
            // h' rises to 2 at the ramp midpoint and falls back to 0
            CutoffKind::Smooth => T::lit(4.0) / self.eps,
        }
    }

    /// Upper bound on `Σ_{m > N} |y^ε_m|` (one side).
    pub fn tail_sum_bound(&self) -> T {
        self.derivative_variation() / (T::PI() * T::from_usize_lossy(self.n_coeff().max(1)))
    }

    /// `N` needed for `Σ_{m>N} |y_m| · scale ≤ tol`.
    pub fn required_n_coeff(&self, scale: T, tol: T) -> usize {
        (self.derivative_variation() * scale / (T::PI() * tol)).ceil().to_usize().unwrap_or(usize::MAX).max(1)
    }

    /// Truncated Fourier series `Σ_{|n|≤N} y_n e^{−inθ}`.
    pub fn reconstruct(&self, theta: T) -> T {
        let tail: T = self.y[1..].iter().enumerate().map(|(i, &y)| y * (T::from_usize_lossy(i + 1) * theta).cos()).sum();
        self.y[0] + T::two() * tail
    }

    /// Direct quadrature of `y^ε_n` from `ψ_ε`, split at the ramp ends.
    pub fn coeff_by_quadrature(&self, n: i64, tol: T) -> T {
        let nf = T::from_i64_lossy(n);
        let breaks = [T::zero(), self.eps, self.eps + self.eps, T::PI()];
        let r = integrate_piecewise(|th: T| (nf * th).cos() * self.psi(th), &breaks, QuadOptions::oscillatory(tol * T::PI(), n));
        r.value / T::PI()
    }
}

/// Both sides of `z_n − z_{n−1} = ε ∫_{ε(n−1)}^{εn} φ(t) dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySides<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> IdentitySides<T> {
    pub fn error(&self) -> T {
        (self.lhs - self.rhs).abs()
    }
}

/// `ε ∫_a^b φ(t) dt` by adaptive quadrature.
pub fn phi_integral<T: Real>(eps: T, a: T, b: T) -> T {
    let width = (b - a).abs().max(T::lit(1e-300));
    let r = integrate(phi::<T>, a, b, QuadOptions::new(T::lit(PHI_QUAD_TOL) * width, T::half()));
    eps * r.value
}

pub fn z_diff_identity<T: Real>(fam: &KernelFamily<T>, n: i64) -> Result<IdentitySides<T>> {
    if fam.kind != CutoffKind::PiecewiseLinear {
        return Err(KernelError::Input("the phi identity holds for the piecewise-linear cutoff only".into()));
    }
    let lhs = fam.z(n)? - fam.z(n - 1)?;
    let eps = fam.eps;
    let rhs = phi_integral(eps, eps * T::from_i64_lossy(n - 1), eps * T::from_i64_lossy(n));
    Ok(IdentitySides { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_spot_values() {
        let fam = KernelFamily::piecewise_linear(PI / 2.0, Some(8)).unwrap();
        assert!((fam.coeff(0).unwrap() - 0.25).abs() < 1e-15);
        assert!((fam.coeff(1).unwrap() + 2.0 / (PI * PI)).abs() < 1e-15);
        assert!((fam.coeff(2).unwrap() - 1.0 / (PI * PI)).abs() < 1e-15);
        assert_eq!(fam.coeff(-2).unwrap(), fam.coeff(2).unwrap());
        assert!(matches!(fam.coeff(9), Err(KernelError::Range { index: 9, n_coeff: 8 })));
    }

    #[test]
    fn complement_relations() {
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(10)).unwrap();
        assert!((fam.z(0).unwrap() - (1.0 - fam.coeff(0).unwrap())).abs() < 1e-16);
        assert!((fam.z(0).unwrap() - 3.0 * (PI / 4.0) / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(fam.z(3).unwrap(), -fam.coeff(3).unwrap());
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(KernelFamily::<f64>::piecewise_linear(PI, None), Err(KernelError::Domain(_))));
        assert!(KernelFamily::<f64>::piecewise_linear(0.0, None).is_err());
        assert!(KernelFamily::<f64>::piecewise_linear(PI / 2.0, None).is_ok());
        assert_eq!(default_n_coeff(PI / 2.0), 64);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for eps in [PI / 8.0, PI / 4.0, PI / 2.0] {
            let fam = KernelFamily::piecewise_linear(eps, Some(64)).unwrap();
            for n in 0..=64 {
                let q = fam.coeff_by_quadrature(n, 1e-12);
                assert!((q - fam.coeff(n).unwrap()).abs() < 1e-10, "eps={eps} n={n}");
            }
        }
    }

    #[test]
    fn smooth_coefficients_match_generic_quadrature() {
        let fam = KernelFamily::smooth(PI / 4.0, Some(40)).unwrap();
        for n in [0i64, 1, 7, 40] {
            let q = fam.coeff_by_quadrature(n, 1e-12);
            assert!((q - fam.coeff(n).unwrap()).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn phi_identity_spot_checks() {
        for (eps, n) in [(PI / 4.0, 0i64), (PI / 2.0, 1), (PI / 8.0, -7), (PI / 4.0, 30)] {
            let fam = KernelFamily::piecewise_linear(eps, Some(64)).unwrap();
            let s = z_diff_identity(&fam, n).unwrap();
            assert!(s.error() < 1e-10, "eps={eps} n={n}: {s:?}");
        }
    }

    #[test]
    fn telescoping_sum_matches_union_integral() {
        let eps = PI / 4.0;
        let big_n = 20i64;
        let fam = KernelFamily::piecewise_linear(eps, Some(32)).unwrap();
        let sum: f64 = (-big_n..=big_n).map(|n| z_diff_identity(&fam, n).unwrap().lhs).sum();
        let direct = fam.z(big_n).unwrap() - fam.z(-big_n - 1).unwrap();
        assert!((sum - direct).abs() < 1e-14);
        let union = phi_integral(eps, eps * (-big_n - 1) as f64, eps * big_n as f64);
        assert!((direct - union).abs() < 1e-9);
    }

    #[test]
    fn identity_rejects_smooth_family() {
        let fam = KernelFamily::smooth(PI / 2.0, Some(4)).unwrap();
        assert!(z_diff_identity(&fam, 1).is_err());
    }

    #[test]
    fn reconstruction_converges() {
        let eps = PI / 4.0;
        let fam = KernelFamily::piecewise_linear(eps, Some(4000)).unwrap();
        let bound = 5.0 / (eps * 4000.0);
        for th in crate::scalar::linspace(-PI, PI, 101) {
            assert!((fam.reconstruct(th) - fam.psi(th)).abs() <= bound, "theta={th}");
        }
    }
}
