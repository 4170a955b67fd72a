//! The integration-by-parts coefficients
//!
//! ```text
//! A_{n,k} = n!/(n+k)!
//! B_{n,k} = n!/(n+k−1)! · Σ_{j=1}^{k} 1/(n+j)
//! C_{n,j} = n!/(n+j+1)! · Σ_{l=1}^{j+1} 1/(n+l)
//! ```
//!
//! generic over the number type, and an exact check of
//! `A ≤ n^{−k}`, `B ≤ k n^{−k}`, `C_{n,j} ≤ (j+1) n^{−(j+2)}` in rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use super::{KernelError, Result};

pub const EXACT_MAX_N: u64 = 100;
pub const EXACT_MAX_K: u64 = 20;

fn q<Q: FromPrimitive>(v: u64) -> Q {
    Q::from_u64(v).expect("integer representable")
}

/// `1 / ((n+1)(n+2)…(n+m))`, i.e. `n!/(n+m)!`.
fn falling_ratio<Q: Num + Clone + FromPrimitive>(n: u64, m: u64) -> Q {
    (1..=m).fold(Q::one(), |acc, i| acc / q::<Q>(n + i))
}

fn harmonic_from<Q: Num + Clone + FromPrimitive>(n: u64, upto: u64) -> Q {
    (1..=upto).fold(Q::zero(), |acc, j| acc + Q::one() / q::<Q>(n + j))
}

pub fn a_coeff<Q: Num + Clone + FromPrimitive>(n: u64, k: u64) -> Q {
    falling_ratio(n, k)
}

pub fn b_coeff<Q: Num + Clone + FromPrimitive>(n: u64, k: u64) -> Q {
    falling_ratio::<Q>(n, k.saturating_sub(1)) * harmonic_from(n, k)
}

pub fn c_coeff<Q: Num + Clone + FromPrimitive>(n: u64, j: u64) -> Q {
    falling_ratio::<Q>(n, j + 1) * harmonic_from(n, j + 1)
}

fn pow_inv<Q: Num + Clone + FromPrimitive>(n: u64, p: u64) -> Q {
    (0..p).fold(Q::one(), |acc, _| acc / q::<Q>(n))
}

/// Exact coefficients and the verdict of the three bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    pub n: u64,
    pub k: u64,
    /// Rationals rendered as `p/q`.
    pub a: String,
    pub b: String,
    pub c_list: Vec<String>,
    pub a_ok: bool,
    pub b_ok: bool,
    pub c_ok: bool,
    pub bounds_ok: bool,
}

pub fn coefficient_bounds_check(n: u64, k: u64) -> Result<CoefficientBounds> {
    if n == 0 || k == 0 || n > EXACT_MAX_N || k > EXACT_MAX_K {
        return Err(KernelError::ExactRange { n, k });
    }
    let a: BigRational = a_coeff(n, k);
    let b: BigRational = b_coeff(n, k);
    let bound_a: BigRational = pow_inv(n, k);
    let bound_b = bound_a.clone() * BigRational::from_integer(BigInt::from(k));
    let a_ok = a <= bound_a;
    let b_ok = b <= bound_b;
    let mut c_ok = true;
    let mut c_list = Vec::new();
    for j in 0..k.saturating_sub(1) {
        let c: BigRational = c_coeff(n, j);
        let bound = pow_inv::<BigRational>(n, j + 2) * BigRational::from_integer(BigInt::from(j + 1));
        c_ok &= c <= bound;
        c_list.push(c.to_string());
    }
    Ok(CoefficientBounds { n, k, a: a.to_string(), b: b.to_string(), c_list, a_ok, b_ok, c_ok, bounds_ok: a_ok && b_ok && c_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn small_cases_exact() {
        assert_eq!(a_coeff::<BigRational>(1, 1), rat(1, 2));
        assert_eq!(b_coeff::<BigRational>(1, 1), rat(1, 2));
        let r = coefficient_bounds_check(1, 1).unwrap();
        assert!(r.c_list.is_empty());
        assert!(r.bounds_ok);

        assert_eq!(a_coeff::<BigRational>(2, 2), rat(1, 12));
        assert_eq!(b_coeff::<BigRational>(2, 2), rat(7, 36));
        assert!(coefficient_bounds_check(2, 2).unwrap().bounds_ok);
        // C_{2,0} = 2!/3! · 1/3
        assert_eq!(c_coeff::<BigRational>(2, 0), rat(1, 9));
    }

    #[test]
    fn n10_k5() {
        let r = coefficient_bounds_check(10, 5).unwrap();
        assert!(r.bounds_ok);
        assert_eq!(r.c_list.len(), 4);
        assert_eq!(r.a, "1/360360");
    }

    #[test]
    fn float_and_rational_agree() {
        for (n, k) in [(3u64, 4u64), (50, 7), (100, 20)] {
            let exact: BigRational = b_coeff(n, k);
            let approx: f64 = b_coeff(n, k);
            let e = num_traits::ToPrimitive::to_f64(&exact).unwrap();
            assert!((e - approx).abs() <= 1e-13 * e);
        }
    }

    #[test]
    fn out_of_window() {
        assert!(matches!(coefficient_bounds_check(101, 2), Err(KernelError::ExactRange { .. })));
        assert!(coefficient_bounds_check(5, 21).is_err());
        assert!(coefficient_bounds_check(0, 1).is_err());
    }
}
