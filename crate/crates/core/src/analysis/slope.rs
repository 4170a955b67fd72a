//! Least-squares slopes on log-log axes.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit<T> {
    /// Fitted exponent `p` in `d_n ≈ A n^p`.
    pub exponent: T,
    /// `ln A`.
    pub intercept: T,
    /// RMS deviation of `ln d_n` from the fitted line.
    pub residual: T,
    pub window: (u64, u64),
}

/// Plain least-squares line through `(ln x, ln y)`; `None` with fewer than
/// two distinct abscissae.
pub(crate) fn fit_log_log<T: Real>(points: impl IntoIterator<Item = (T, T)>) -> Option<(T, T, T)> {
    let pts: Vec<(T, T)> = points.into_iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx <= T::zero() {
        return None;
    }
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: T = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    Some((slope, intercept, (rss / k).sqrt()))
}

/// Log-log slope of `values` over the window `[n1, n2]`, where `values[i]`
/// belongs to index `start + i`.
pub fn slope_estimate<T: Real>(values: &[T], start: u64, window: (u64, u64)) -> Result<SlopeFit<T>, AnalysisError> {
    let (n1, n2) = window;
    if n1 == 0 {
        return Err(AnalysisError::Input("slope window must start at n >= 1".into()));
    }
    if n2 < 2 * n1 {
        return Err(AnalysisError::Input(format!("slope window [{n1}, {n2}] must satisfy n2 >= 2 n1")));
    }
    let end = start + values.len() as u64;
    if n1 < start || n2 >= end {
        return Err(AnalysisError::Input(format!("slope window [{n1}, {n2}] outside the available range [{start}, {}]", end.saturating_sub(1))));
    }
    let lo = (n1 - start) as usize;
    let hi = (n2 - start) as usize;
    let mut pts = Vec::with_capacity(hi - lo + 1);
    for (i, &v) in values[lo..=hi].iter().enumerate() {
        if !(v > T::zero() && v.is_finite()) {
            return Err(AnalysisError::Input(format!("value at n = {} is not positive: {v}", n1 + i as u64)));
        }
        pts.push((T::from_u64(n1 + i as u64).expect("u64 representable"), v));
    }
    let (exponent, intercept, residual) = fit_log_log(pts).expect("window has at least two points");
    Ok(SlopeFit { exponent, intercept, residual, window })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let v: Vec<f64> = (1..=400).map(|n| (n as f64).powi(-2)).collect();
        let f = slope_estimate(&v, 1, (10, 400)).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        let v: Vec<f64> = (0..=400).map(|n| if n == 0 { 7.0 } else { 5.0 / n as f64 }).collect();
        let f = slope_estimate(&v, 0, (20, 400)).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_windows_and_values() {
        let v = vec![1.0f64; 100];
        assert!(slope_estimate(&v, 0, (10, 15)).is_err());
        assert!(slope_estimate(&v, 0, (0, 50)).is_err());
        assert!(slope_estimate(&v, 0, (10, 200)).is_err());
        let mut w = v.clone();
        w[30] = 0.0;
        assert!(matches!(slope_estimate(&w, 0, (10, 60)), Err(AnalysisError::Input(_))));
    }
}
