//! Cutoff functions `ψ_ε` and the auxiliary function `φ`.

use crate::scalar::Real;

/// `g(s) = exp(−1/s)` for `s > 0`, zero otherwise.
fn bump_half<T: Real>(s: T) -> T {
    if s > T::zero() {
        (-s.recip()).exp()
    } else {
        T::zero()
    }
}

/// C^∞ ramp from 0 (at `s ≤ 0`) to 1 (at `s ≥ 1`): `g(s) / (g(s) + g(1−s))`.
pub fn smooth_ramp<T: Real>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    if s >= T::one() {
        return T::one();
    }
    let a = bump_half(s);
    let b = bump_half(T::one() - s);
    a / (a + b)
}

/// Derivative of [`smooth_ramp`]. Peaks at `s = 1/2` with value 2.
pub fn smooth_ramp_derivative<T: Real>(s: T) -> T {
    if s <= T::zero() || s >= T::one() {
        return T::zero();
    }
    // h = σ(−q), q = 1/s − 1/(1−s); h' = h (1−h) (1/s² + 1/(1−s)²)
    let h = smooth_ramp(s);
    let t = T::one() - s;
    h * (T::one() - h) * (s * s).recip() + h * (T::one() - h) * (t * t).recip()
}

/// Piecewise-linear cutoff: 0 on `|θ| ≤ ε`, `|θ|/ε − 1` on the ramp, 1 beyond `2ε`.
pub fn psi_linear<T: Real>(eps: T, theta: T) -> T {
    let a = theta.abs();
    if a <= eps {
        T::zero()
    } else if a >= eps + eps {
        T::one()
    } else {
        a / eps - T::one()
    }
}

/// Smooth cutoff `ψ(θ/ε)` with `ψ(θ) = h(|θ| − 1)`.
pub fn psi_smooth<T: Real>(eps: T, theta: T) -> T {
    smooth_ramp(theta.abs() / eps - T::one())
}

/// Below this `|t|` the bracket of `φ` is evaluated from its Taylor series.
pub const PHI_SERIES_CUTOFF: f64 = 0.25;

/// Taylor coefficients of the bracket of `φ` at odd powers `t, t³, …, t¹³`.
const PHI_SERIES: [f64; 7] =
    [-5.0 / 8.0, 7.0 / 40.0, -17.0 / 896.0, 341.0 / 302_400.0, -13.0 / 304_128.0, 5461.0 / 4_843_238_400.0, -4369.0 / 199_264_665_600.0];

/// `φ(t) = (2/π) [ (cos 2t − cos t)/t³ + (sin 2t − ½ sin t)/t² ]`, `φ(0) = 0`.
///
/// The two terms are each `O(t⁻³)` while their sum is `O(t)`, so for
/// `|t| < 0.25` the odd Taylor series `−(5/8) t + (7/40) t³ − …` through
/// `t¹³` is used instead (truncation error below 1e-17).
pub fn phi<T: Real>(t: T) -> T {
    let two_over_pi = T::FRAC_2_PI();
    if t.abs() < T::lit(PHI_SERIES_CUTOFF) {
        let t2 = t * t;
        let poly = PHI_SERIES.iter().rev().fold(T::zero(), |acc, &c| acc * t2 + T::lit(c));
        return two_over_pi * t * poly;
    }
    let t2 = t * t;
    let two_t = t + t;
    two_over_pi * ((two_t.cos() - t.cos()) / (t2 * t) + (two_t.sin() - T::half() * t.sin()) / t2)
}
