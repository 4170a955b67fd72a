//! Kernel identity suite, reported per identity as a serializable record.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{coefficient_bounds_check, convolve, spectral_form, z_diff_identity, BoundarySampler, KernelError, KernelFamily, Result, Sequence};
use crate::scalar::linspace;

pub const CLOSED_FORM_TOL: f64 = 1e-8;
pub const PHI_IDENTITY_TOL: f64 = 1e-8;
pub const DUALITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestConfig {
    pub eps: Vec<f64>,
    /// Closed form vs quadrature for `|n| ≤ closed_form_n`.
    pub closed_form_n: i64,
    /// φ identity for `|n| ≤ phi_n`.
    pub phi_n: i64,
    /// Truncation used in the reconstruction check.
    pub reconstruction_n: usize,
    pub reconstruction_grid: usize,
    /// Duality check on the geometric sequence for `0 ≤ n ≤ duality_n`.
    pub duality_n: i64,
    /// Exact coefficient bounds for `1 ≤ n ≤ bounds_n`, `1 ≤ k ≤ bounds_k`.
    pub bounds_n: u64,
    pub bounds_k: u64,
}

impl Default for SelfTestConfig {
    fn default() -> Self {
        Self {
            eps: vec![PI / 8.0, PI / 4.0, PI / 2.0],
            closed_form_n: 64,
            phi_n: 50,
            reconstruction_n: 10_000,
            reconstruction_grid: 1001,
            duality_n: 50,
            bounds_n: 100,
            bounds_k: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityResult {
    fn new(name: &str, max_error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_error, tolerance, pass: max_error <= tolerance }
    }
}

/// Constants of the smooth-family difference bounds, fitted at the largest ε:
/// `|z_n − z_{n−1}| ≤ C₁ ε²` and `≤ C₂ / n²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub config: SelfTestConfig,
    pub identities: Vec<IdentityResult>,
    pub fitted: FittedConstants,
    pub all_pass: bool,
}

impl SelfTestReport {
    pub fn failed(&self) -> Vec<&str> {
        self.identities.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect()
    }
}

/// Fit `C₁ = max |Δz| / ε²` over `|n| ≤ 200` and `C₂ = max n² |Δz|` over `1 ≤ n ≤ 200`.
pub fn smooth_difference_constants(eps: f64) -> Result<FittedConstants> {
    let fam = KernelFamily::<f64>::smooth(eps, Some(201))?;
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for n in -200i64..=200 {
        let d = (fam.z(n)? - fam.z(n - 1)?).abs();
        c1 = c1.max(d / (eps * eps));
        if n >= 1 {
            c2 = c2.max(d * (n * n) as f64);
        }
    }
    Ok(FittedConstants { eps, c1, c2 })
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(KernelError::Input("empty epsilon list".into()));
    }
    for &e in eps {
        if !(e > 0.0 && e <= PI / 2.0 * (1.0 + f64::EPSILON)) {
            return Err(KernelError::Domain(e));
        }
    }
    Ok(())
}

pub fn run_selftest(config: &SelfTestConfig) -> Result<SelfTestReport> {
    check_eps(&config.eps)?;
    let mut identities = Vec::new();

    let mut closed = 0.0f64;
    let mut phi_err = 0.0f64;
    let mut recon_err = 0.0f64;
    let mut recon_tol = f64::INFINITY;
    let mut dual = 0.0f64;
    for &eps in &config.eps {
        let n_tab = config.closed_form_n.max(config.phi_n + 1).max(1) as usize;
        let fam = KernelFamily::<f64>::piecewise_linear(eps, Some(n_tab))?;
        for n in 0..=config.closed_form_n {
            closed = closed.max((fam.coeff_by_quadrature(n, 1e-12) - fam.coeff(n)?).abs());
        }
        for n in -config.phi_n..=config.phi_n {
            phi_err = phi_err.max(z_diff_identity(&fam, n)?.error());
        }

        let big = KernelFamily::<f64>::piecewise_linear(eps, Some(config.reconstruction_n))?;
        let grid = linspace(-PI, PI, config.reconstruction_grid.max(2));
        let err = grid.iter().map(|&th| (big.reconstruct(th) - big.psi(th)).abs()).fold(0.0, f64::max);
        // compare relative to each ε's own bound, report on the tightest scale
        let tol = 5.0 / (eps * config.reconstruction_n as f64);
        if err / tol > recon_err / recon_tol || recon_tol.is_infinite() {
            recon_err = err;
            recon_tol = tol;
        }

        let mu = Complex::new(0.5, 0.0);
        let conv = convolve(&Sequence::geometric(mu), &big, (0, config.duality_n), Some(DUALITY_TOL / 10.0))?;
        let f = BoundarySampler::geometric(mu);
        for (n, v) in conv.values.iter().enumerate() {
            let s = spectral_form(&f, &big, n as i64)?;
            dual = dual.max((v[0] - s[0]).norm());
        }
    }
    identities.push(IdentityResult::new("closed-form-vs-quadrature", closed, CLOSED_FORM_TOL));
    identities.push(IdentityResult::new("phi-identity", phi_err, PHI_IDENTITY_TOL));
    identities.push(IdentityResult::new("reconstruction", recon_err, recon_tol));
    identities.push(IdentityResult::new("duality", dual, DUALITY_TOL));

    let mut bounds_fail = 0usize;
    for n in 1..=config.bounds_n {
        for k in 1..=config.bounds_k {
            if !coefficient_bounds_check(n, k)?.bounds_ok {
                bounds_fail += 1;
            }
        }
    }
    identities.push(IdentityResult::new("coeff-bounds", bounds_fail as f64, 0.0));

    let largest = config.eps.iter().copied().fold(0.0, f64::max);
    let fitted = smooth_difference_constants(largest)?;
    let all_pass = identities.iter().all(|r| r.pass);
    Ok(SelfTestReport { config: config.clone(), identities, fitted, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = SelfTestConfig {
            eps: vec![PI / 4.0],
            closed_form_n: 16,
            phi_n: 10,
            reconstruction_n: 2000,
            reconstruction_grid: 101,
            duality_n: 10,
            bounds_n: 10,
            bounds_k: 4,
        };
        let r = run_selftest(&cfg).unwrap();
        assert!(r.all_pass, "{:?}", r.identities);
        assert!(r.failed().is_empty());
        assert!(r.fitted.c1 > 0.0 && r.fitted.c2 > 0.0);
    }

    #[test]
    fn rejects_out_of_range_eps() {
        let cfg = SelfTestConfig { eps: vec![PI], ..SelfTestConfig::default() };
        assert!(matches!(run_selftest(&cfg), Err(KernelError::Domain(_))));
    }
}
