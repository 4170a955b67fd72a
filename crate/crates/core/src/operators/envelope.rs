//! Monotone envelopes of sampled boundary resolvent norms.

use serde::{Deserialize, Serialize};

use super::{OperatorError, Result};
use crate::rates::{RateFunction, Tail};
use crate::scalar::Real;

/// Sampled resolvent norms `θ ↦ ‖R(e^{iθ},T)‖` and the rate function fitted to them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ResolventProfile<T> {
    pub samples: Vec<(T, T)>,
    pub envelope: RateFunction<T>,
}

/// Running-maximum envelope with the `max(1, 1/ε)` floor:
///
/// `m(εᵢ) = max(1, 1/εᵢ, max{norm : |θ| ≥ εᵢ})`
///
/// Samples at `±θ` are pooled under `ε = |θ|`. Below the smallest sampled
/// angle the envelope continues as `C/ε`.
pub fn fit_envelope<T: Real>(samples: &[(T, T)]) -> Result<RateFunction<T>> {
    if samples.is_empty() {
        return Err(OperatorError::Input("envelope needs at least one sample".into()));
    }
    let mut pts: Vec<(T, T)> = Vec::with_capacity(samples.len());
    for &(th, v) in samples {
        let e = th.abs();
        if !(e > T::zero() && e <= T::PI()) {
            return Err(OperatorError::Input(format!("sample angle {th} outside 0 < |theta| <= pi")));
        }
        if !(v.is_finite() && v >= T::zero()) {
            return Err(OperatorError::Input(format!("sample norm {v} at theta = {th} is not a finite non-negative number")));
        }
        pts.push((e, v));
    }
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite"));
    let mut table: Vec<(T, T)> = Vec::with_capacity(pts.len());
    let mut running = T::zero();
    for (e, v) in pts {
        running = running.max(v);
        let val = running.max(T::one()).max(e.recip());
        match table.last_mut() {
            Some(last) if last.0 == e => last.1 = last.1.max(val),
            _ => table.push((e, val)),
        }
    }
    Ok(RateFunction::tabulated(table, Tail::Reciprocal)?)
}
