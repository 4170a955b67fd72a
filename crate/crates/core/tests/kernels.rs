use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use tauber::kernels::coeffs::{a_coeff, b_coeff, c_coeff};
use tauber::kernels::selftest::{run_selftest, smooth_difference_constants, SelfTestConfig};
use tauber::kernels::{approximation_gap, convolve, smooth_decay_budget, spectral_form};
use tauber::{BoundarySampler, KernelFamily, Operator, OperatorSpec, RateFunction, Sequence};

#[test]
fn smooth_difference_bounds_scale_with_eps() {
    let fitted = smooth_difference_constants(FRAC_PI_2).unwrap();
    for eps in [PI / 4.0, PI / 8.0, PI / 16.0] {
        let fam = KernelFamily::smooth(eps, Some(201)).unwrap();
        for n in -200i64..=200 {
            let d = (fam.z(n).unwrap() - fam.z(n - 1).unwrap()).abs();
            assert!(d <= 2.0 * fitted.c1 * eps * eps, "eps {eps} n {n}: {d} > 2 C1 eps^2");
            if n >= 1 {
                assert!(d <= 2.0 * fitted.c2 / (n * n) as f64, "eps {eps} n {n}: {d} > 2 C2 / n^2");
            }
        }
    }
}

#[test]
fn riemann_lebesgue_decay_of_smoothed_sequence() {
    let f = BoundarySampler::geometric(Complex64::new(0.5, 0.0));
    for fam in [KernelFamily::piecewise_linear(FRAC_PI_4, None).unwrap(), KernelFamily::smooth(FRAC_PI_4, None).unwrap()] {
        let norm = |n: i64| spectral_form(&f, &fam, n).unwrap()[0].norm();
        let early = (1..=10).map(norm).fold(0.0, f64::max);
        let late = (1000..=1010).map(norm).fold(0.0, f64::max);
        assert!(late * 10.0 <= early, "{:?}: late {late}, early {early}", fam.kind());
    }
}

#[test]
fn impulse_gap_is_bounded_by_the_table() {
    let fam = KernelFamily::piecewise_linear(FRAC_PI_4, None).unwrap();
    let gap = approximation_gap(&Sequence::impulse(), &fam, (0, 100), None).unwrap();
    let y0 = fam.coeff(0).unwrap().abs();
    for (n, g) in gap.iter().enumerate() {
        let want = ((n == 0) as u8 as f64 - fam.coeff(n as i64).unwrap()).abs();
        assert!((g - want).abs() < 1e-15);
        assert!(*g <= 1.0 + y0);
    }
}

#[test]
fn finite_zero_sum_gap_vanishes() {
    let x = Sequence::finite(vec![Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(1.0, 0.0)]);
    let fam = KernelFamily::piecewise_linear(FRAC_PI_4, Some(5000)).unwrap();
    let gap = approximation_gap(&x, &fam, (0, 4000), None).unwrap();
    let early = gap[..10].iter().copied().fold(0.0, f64::max);
    let late = gap[3000..].iter().copied().fold(0.0, f64::max);
    assert!(late < 1e-4 * early, "{late} vs {early}");
}

#[test]
fn observed_smoothed_orbit_obeys_the_budget() {
    let op: Operator = OperatorSpec::diagonal_real(&[0.5]).build().unwrap();
    let grid: Vec<f64> = tauber::scalar::logspace(1e-3, PI, 64);
    let m = op.profile(&grid).unwrap().envelope;
    let eps = FRAC_PI_4;
    let fam = KernelFamily::smooth(eps, None).unwrap();
    let f = BoundarySampler::operator(&op);
    let ratio = |n: u64| {
        let obs = spectral_form(&f, &fam, n as i64).unwrap()[0].norm();
        obs / smooth_decay_budget(&m, eps, n, 0.5).unwrap()
    };
    let c = (10..=30).map(ratio).fold(0.0, f64::max);
    for n in 31..=100 {
        assert!(ratio(n) <= c * (1.0 + 1e-9), "n = {n}");
    }
}

#[test]
fn budget_decreases_past_m_over_c() {
    let one = RateFunction::constant(1.0).unwrap();
    let mut prev = f64::INFINITY;
    for n in 2..200 {
        let b = smooth_decay_budget(&one, 1.0, n, 0.5).unwrap();
        assert!(b < prev);
        prev = b;
    }
}

#[test]
fn default_selftest_passes() {
    let report = run_selftest(&SelfTestConfig::default()).unwrap();
    assert!(report.all_pass, "{:?}", report.failed());
    assert_eq!(report.identities.len(), 5);
    assert!(run_selftest(&SelfTestConfig { eps: vec![PI], ..SelfTestConfig::default() }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duality_on_geometric_sequences(r in 0.0f64..0.8, t in -PI..PI, eps in 0.2f64..FRAC_PI_2) {
        let mu = Complex64::from_polar(r, t);
        let fam = KernelFamily::piecewise_linear(eps, Some(4000)).unwrap();
        let conv = convolve(&Sequence::geometric(mu), &fam, (0, 20), Some(1e-9)).unwrap();
        let f = BoundarySampler::geometric(mu);
        for (n, v) in conv.values.iter().enumerate() {
            let s = spectral_form(&f, &fam, n as i64).unwrap();
            prop_assert!((v[0] - s[0]).norm() <= 1e-6);
        }
    }

    #[test]
    fn float_coefficients_agree_with_rationals(n in 1u64..=100, k in 1u64..=20) {
        let exact = |q: BigRational| q.to_f64().unwrap();
        let a: f64 = a_coeff(n, k);
        let b: f64 = b_coeff(n, k);
        prop_assert!((a - exact(a_coeff::<BigRational>(n, k))).abs() <= 1e-12 * a.abs());
        prop_assert!((b - exact(b_coeff::<BigRational>(n, k))).abs() <= 1e-12 * b.abs());
        for j in 0..k {
            let c: f64 = c_coeff(n, j);
            prop_assert!((c - exact(c_coeff::<BigRational>(n, j))).abs() <= 1e-12 * c.abs());
        }
        let one = BigRational::from_integer(BigInt::from(1));
        prop_assert!(a_coeff::<BigRational>(n, k) <= one);
    }
}
