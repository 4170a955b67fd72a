//! Smoothed sequences `x^ε = x ∗ y^ε`, computed both by truncated
//! convolution and from the boundary function.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundarySampler, KernelError, KernelFamily, Result, Sequence};
use crate::quad::{integrate_piecewise, QuadOptions};
use crate::rates::{proof_budget, RateFunction};
use crate::scalar::Real;

/// Absolute accuracy of [`spectral_form`].
pub const SPECTRAL_FORM_TOL: f64 = 1e-8;

/// Truncated convolution output for `n_range.0 ≤ n ≤ n_range.1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convolution<T> {
    pub n_range: (i64, i64),
    pub values: Vec<Vec<Complex<T>>>,
    /// Bound on the discarded part of every convolution sum.
    pub tail_bound: T,
    /// False when the far tail of `x` had no a-priori bound and its size was
    /// estimated from the computed terms.
    pub rigorous: bool,
}

fn check_range(n_range: (i64, i64)) -> Result<()> {
    if n_range.0 > n_range.1 {
        return Err(KernelError::Input(format!("empty index range [{}, {}]", n_range.0, n_range.1)));
    }
    Ok(())
}

/// `x^ε_n = Σ_{j≥0} x_j y^ε_{n−j}`, keeping `|n − j| ≤ N`.
///
/// With `tol` set, fails with the required `N_coeff` when the truncation
/// bound exceeds it.
pub fn convolve<T: Real>(x: &Sequence<T>, fam: &KernelFamily<T>, n_range: (i64, i64), tol: Option<T>) -> Result<Convolution<T>> {
    check_range(n_range)?;
    let big_n = fam.n_coeff() as i64;
    let (lo, hi) = n_range;
    let len = (hi + big_n + 1).max(0) as usize;
    let terms = x.terms(len);
    let norms: Vec<T> = terms.iter().map(|t| x.norm(t)).collect();

    // discarded j < n − N (only when n > N): those terms are known
    let near_sup = if hi > big_n { norms[..(hi - big_n) as usize].iter().copied().fold(T::zero(), T::max) } else { T::zero() };
    // discarded j > n + N: need an a-priori bound on the far tail
    let far_start = (lo + big_n + 1).max(0) as u64;
    let (far_sup, rigorous) = match x.tail_sup(far_start) {
        Some(b) => (b, true),
        None => (norms.get(far_start as usize..).map_or(T::zero(), |s| s.iter().copied().fold(T::zero(), T::max)), false),
    };
    let scale = near_sup + far_sup;
    let tail_bound = scale * fam.tail_sum_bound();
    if let Some(tol) = tol {
        if tail_bound > tol {
            return Err(KernelError::Tolerance {
                bound: tail_bound.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
                required: fam.required_n_coeff(scale, tol),
            });
        }
    }

    let dim = x.shape().len();
    let y = fam.table();
    let values = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let mut acc = vec![Complex::new(T::zero(), T::zero()); dim];
            let j0 = (n - big_n).max(0);
            let j1 = n + big_n;
            for j in j0..=j1 {
                let w = y[(n - j).unsigned_abs() as usize];
                for (a, b) in acc.iter_mut().zip(&terms[j as usize]) {
                    *a = *a + *b * w;
                }
            }
            acc
        })
        .collect();
    Ok(Convolution { n_range, values, tail_bound, rigorous })
}

/// `x^ε_n = (1/2π) ∫_{ε≤|θ|≤π} e^{i(n+1)θ} ψ_ε(θ) F(e^{iθ}) dθ`.
pub fn spectral_form<T: Real>(f: &BoundarySampler<T>, fam: &KernelFamily<T>, n: i64) -> Result<Vec<Complex<T>>> {
    let eps = fam.eps();
    let two_eps = eps + eps;
    let pi = T::PI();
    let freq = T::from_i64_lossy(n + 1);
    let integrand = |th: T| -> Vec<Complex<T>> {
        let w = Complex::from_polar(fam.psi(th), freq * th);
        f.eval(th).into_iter().map(|z| z * w).collect()
    };
    let opts = QuadOptions::oscillatory(T::lit(SPECTRAL_FORM_TOL) * T::two() * pi, (n + 1).abs().max(n.abs()));
    let mut breaks = vec![-pi, -two_eps, -eps];
    if two_eps >= pi {
        breaks.remove(1);
    }
    let neg = integrate_piecewise(integrand, &breaks, opts);
    let mut breaks = vec![eps, two_eps, pi];
    if two_eps >= pi {
        breaks.remove(1);
    }
    let pos = integrate_piecewise(integrand, &breaks, opts);
    let scale = (T::two() * pi).recip();
    let out: Vec<Complex<T>> = neg.value.iter().zip(&pos.value).map(|(a, b)| (*a + *b) * scale).collect();
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(KernelError::Input(format!("boundary function is not finite on eps <= |theta| <= pi (n = {n})")));
    }
    Ok(out)
}

/// `‖x_n − x^ε_n‖` for `n` in the range.
pub fn approximation_gap<T: Real>(x: &Sequence<T>, fam: &KernelFamily<T>, n_range: (i64, i64), tol: Option<T>) -> Result<Vec<T>> {
    let (lo, hi) = n_range;
    if lo < 0 {
        return Err(KernelError::Input("approximation gap is defined for n >= 0".into()));
    }
    let conv = convolve(x, fam, n_range, tol)?;
    let terms = x.terms(hi as usize + 1);
    Ok(conv
        .values
        .iter()
        .zip(&terms[lo as usize..])
        .map(|(smoothed, orig)| {
            let diff: Vec<Complex<T>> = orig.iter().zip(smoothed).map(|(a, b)| *a - *b).collect();
            x.norm(&diff)
        })
        .collect())
}

/// `D + E` from the smooth-regime budget at `k = ⌊cn/m(ε)⌋`.
pub fn smooth_decay_budget<T: Real>(m: &RateFunction<T>, eps: T, n: u64, c: T) -> Result<T> {
    Ok(proof_budget(m, eps, n, c)?.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Shape;
    use std::f64::consts::PI;

    #[test]
    fn impulse_convolution_is_the_kernel() {
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(50)).unwrap();
        let conv = convolve(&Sequence::impulse(), &fam, (-10, 10), None).unwrap();
        for (i, v) in conv.values.iter().enumerate() {
            let n = i as i64 - 10;
            assert_eq!(v[0].re, fam.coeff(n).unwrap());
        }
        assert_eq!(conv.tail_bound, 0.0);
        assert!(conv.rigorous);
    }

    #[test]
    fn zero_sequence() {
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(20)).unwrap();
        let conv = convolve(&Sequence::zeros(), &fam, (0, 5), Some(1e-12)).unwrap();
        assert!(conv.values.iter().all(|v| v[0].norm() == 0.0));
        let f = BoundarySampler::zero();
        assert_eq!(spectral_form(&f, &fam, 3).unwrap()[0].norm(), 0.0);
    }

    #[test]
    fn tolerance_error_names_required_size() {
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(100)).unwrap();
        match convolve(&Sequence::alternating(), &fam, (0, 10), Some(1e-4)) {
            Err(KernelError::Tolerance { required, .. }) => {
                let bigger = KernelFamily::piecewise_linear(PI / 4.0, Some(required)).unwrap();
                assert!(convolve(&Sequence::alternating(), &bigger, (0, 10), Some(1e-4)).is_ok());
            }
            other => panic!("expected tolerance error, got {other:?}"),
        }
    }

    #[test]
    fn geometric_convolution_matches_spectral_form() {
        let mu = Complex::new(0.5, 0.0);
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(400)).unwrap();
        let conv = convolve(&Sequence::geometric(mu), &fam, (0, 40), Some(1e-9)).unwrap();
        let f = BoundarySampler::geometric(mu);
        for (i, v) in conv.values.iter().enumerate() {
            let s = spectral_form(&f, &fam, i as i64).unwrap();
            assert!((v[0] - s[0]).norm() < 1e-7, "n={i}");
        }
    }

    #[test]
    fn impulse_gap_bounded_by_table() {
        let fam = KernelFamily::piecewise_linear(PI / 2.0, Some(64)).unwrap();
        let gaps = approximation_gap(&Sequence::impulse(), &fam, (0, 30), None).unwrap();
        let y0 = fam.coeff(0).unwrap();
        for (n, g) in gaps.iter().enumerate() {
            let expect = ((if n == 0 { 1.0 } else { 0.0 }) - fam.coeff(n as i64).unwrap()).abs();
            assert!((g - expect).abs() < 1e-15);
            assert!(*g <= 1.0 + y0.abs());
        }
    }

    #[test]
    fn finitely_supported_zero_sum_gap_vanishes() {
        let x = Sequence::finite(vec![Complex::new(1.0, 0.0), Complex::new(-2.0, 0.0), Complex::new(1.0, 0.0)]);
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(2000)).unwrap();
        let gaps = approximation_gap(&x, &fam, (0, 1500), None).unwrap();
        assert!(gaps[1400] < 1e-5 * gaps[..10].iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn matrix_orbit_spectral_form_matches_convolution() {
        let spec = crate::operators::OperatorSpec::Dense { entries: vec![vec![[0.5, 0.0], [0.3, 0.0]], vec![[0.0, 0.0], [0.2, 0.4]]] };
        let op = spec.build::<f64>().unwrap();
        let seq = Sequence::operator_orbit(&op);
        assert_eq!(seq.shape(), Shape::Matrix(2));
        let fam = KernelFamily::piecewise_linear(PI / 4.0, Some(300)).unwrap();
        let conv = convolve(&seq, &fam, (0, 10), None).unwrap();
        let f = BoundarySampler::operator(&op);
        for (n, v) in conv.values.iter().enumerate() {
            let s = spectral_form(&f, &fam, n as i64).unwrap();
            for (a, b) in v.iter().zip(&s) {
                assert!((a - b).norm() < 1e-7);
            }
        }
    }
}
