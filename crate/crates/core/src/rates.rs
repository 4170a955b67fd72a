//! Rate functions `m`, the derived rates `m_log` and `m_k`, their monotone
//! inverses, and the decay predictions built from them.
//!
//! A rate function is a continuous non-increasing map `m : (0, π] → [1, ∞)`.
//! Two derived rates are formed from it:
//!
//! ```text
//! m_log(ε) = m(ε) · ln(1 + m(ε)/ε)
//! m_k(ε)   = m(ε) · (m(ε)/ε)^(1/k)
//! ```
//!
//! Both are strictly positive and non-increasing, so they can be inverted by
//! bisection. Exponential rates overflow `f64` long before `ε` gets small, so
//! every rate also evaluates in log space and the inversion runs there.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{softplus, Real};

/// Lower end of the bisection bracket for inversion.
pub const INVERSION_EPS_MIN: f64 = 1e-12;
/// Bisection iteration cap.
pub const INVERSION_MAX_ITER: usize = 200;
/// Relative accuracy demanded of an inverted value.
pub const INVERSION_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("epsilon = {0} lies outside (0, pi]")]
    Domain(f64),
    #[error("target {target} is below the attainable range (minimum {minimum}, reached at epsilon = pi)")]
    BelowRange { target: f64, minimum: f64 },
    #[error("target {0} needs epsilon below {INVERSION_EPS_MIN}")]
    AboveRange(f64),
    #[error("bisection did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid rate function: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, RateError>;

/// Extrapolation of a tabulated rate below its smallest sampled `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Hold the last sampled value.
    #[default]
    Flat,
    /// Continue as `v_last · ε_last / ε`, i.e. with log-log slope −1.
    Reciprocal,
}

/// A validated table of `(ε, m(ε))` samples, stored by decreasing `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedRate<T> {
    eps: Vec<T>,
    values: Vec<T>,
    ln_eps: Vec<T>,
    ln_values: Vec<T>,
    tail: Tail,
}

impl<T: Real> TabulatedRate<T> {
    /// Samples may come in any order; `ε` values must be distinct, inside
    /// `(0, π]`, and the values must not decrease as `ε` decreases.
    pub fn new(samples: impl IntoIterator<Item = (T, T)>, tail: Tail) -> Result<Self> {
        let mut samples: Vec<(T, T)> = samples.into_iter().collect();
        if samples.is_empty() {
            return Err(RateError::Invalid("tabulated rate needs at least one sample".into()));
        }
        for &(e, v) in &samples {
            if !(e > T::zero() && e <= T::PI()) {
                return Err(RateError::Domain(e.to_f64_lossy()));
            }
            if !(v.is_finite() && v > T::zero()) {
                return Err(RateError::Invalid(format!("sample value {v} must be finite and positive")));
            }
        }
        samples.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite"));
        for w in samples.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(RateError::Invalid(format!("duplicate sample at epsilon = {}", w[0].0)));
            }
            if w[1].1 < w[0].1 {
                return Err(RateError::Invalid(format!("not non-increasing: m({}) = {} < m({}) = {}", w[1].0, w[1].1, w[0].0, w[0].1)));
            }
        }
        let (eps, values): (Vec<T>, Vec<T>) = samples.into_iter().unzip();
        Ok(Self { ln_eps: eps.iter().map(|e| e.ln()).collect(), ln_values: values.iter().map(|v| v.ln()).collect(), eps, values, tail })
    }

    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.eps.iter().copied().zip(self.values.iter().copied())
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Log of the interpolated value (before clamping at 1).
    fn ln_interp(&self, eps: T) -> T {
        let last = self.eps.len() - 1;
        if eps >= self.eps[0] {
            return self.ln_values[0];
        }
        if eps <= self.eps[last] {
            return match self.tail {
                Tail::Flat => self.ln_values[last],
                Tail::Reciprocal => self.ln_values[last] + self.ln_eps[last] - eps.ln(),
            };
        }
        // first index whose epsilon is below the query
        let hi = self.eps.partition_point(|&e| e >= eps);
        let lo = hi - 1;
        let t = (eps.ln() - self.ln_eps[lo]) / (self.ln_eps[hi] - self.ln_eps[lo]);
        self.ln_values[lo] + t * (self.ln_values[hi] - self.ln_values[lo])
    }

    /// Interpolated value (before clamping at 1); exact on samples and flat pieces.
    fn interp(&self, eps: T) -> T {
        let last = self.eps.len() - 1;
        if eps >= self.eps[0] {
            return self.values[0];
        }
        if eps <= self.eps[last] {
            return match self.tail {
                Tail::Flat => self.values[last],
                Tail::Reciprocal => self.values[last] * (self.eps[last] / eps),
            };
        }
        let hi = self.eps.partition_point(|&e| e >= eps);
        let lo = hi - 1;
        if self.eps[lo] == eps {
            return self.values[lo];
        }
        if self.values[lo] == self.values[hi] {
            return self.values[lo];
        }
        self.ln_interp(eps).exp()
    }
}

/// Serialized form of a [`RateFunction`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
#[serde(bound = "T: Real")]
pub enum RateSpec<T> {
    Poly {
        c: T,
        alpha: T,
    },
    Exp {
        alpha: T,
    },
    Tabulated {
        samples: Vec<(T, T)>,
        #[serde(default)]
        tail: Tail,
    },
}

/// A continuous non-increasing rate `m : (0, π] → [1, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RateSpec<T>", into = "RateSpec<T>")]
#[serde(bound = "T: Real")]
pub enum RateFunction<T> {
    /// `m(ε) = C (π/ε)^α`.
    Poly { c: T, alpha: T },
    /// `m(ε) = exp(ε^(−α))`.
    Exp { alpha: T },
    /// Monotone piecewise-linear interpolation in `(ln ε, ln m)`, clamped below by 1.
    Tabulated(TabulatedRate<T>),
}

impl<T: Real> TryFrom<RateSpec<T>> for RateFunction<T> {
    type Error = RateError;

    fn try_from(spec: RateSpec<T>) -> Result<Self> {
        match spec {
            RateSpec::Poly { c, alpha } => Self::poly(c, alpha),
            RateSpec::Exp { alpha } => Self::exp(alpha),
            RateSpec::Tabulated { samples, tail } => Ok(Self::Tabulated(TabulatedRate::new(samples, tail)?)),
        }
    }
}

impl<T: Real> From<RateFunction<T>> for RateSpec<T> {
    fn from(m: RateFunction<T>) -> Self {
        match m {
            RateFunction::Poly { c, alpha } => RateSpec::Poly { c, alpha },
            RateFunction::Exp { alpha } => RateSpec::Exp { alpha },
            RateFunction::Tabulated(t) => RateSpec::Tabulated { samples: t.samples().collect(), tail: t.tail },
        }
    }
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps <= T::PI() {
        Ok(())
    } else {
        Err(RateError::Domain(eps.to_f64_lossy()))
    }
}

impl<T: Real> RateFunction<T> {
    /// `C ≥ 1` keeps `m(π) = C` inside the codomain `[1, ∞)`.
    pub fn poly(c: T, alpha: T) -> Result<Self> {
        if !(c.is_finite() && c >= T::one()) {
            return Err(RateError::Invalid(format!("poly rate needs C >= 1, got {c}")));
        }
        if !(alpha.is_finite() && alpha >= T::one()) {
            return Err(RateError::Invalid(format!("poly rate needs alpha >= 1, got {alpha}")));
        }
        Ok(Self::Poly { c, alpha })
    }

    pub fn exp(alpha: T) -> Result<Self> {
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(RateError::Invalid(format!("exp rate needs alpha > 0, got {alpha}")));
        }
        Ok(Self::Exp { alpha })
    }

    pub fn tabulated(samples: impl IntoIterator<Item = (T, T)>, tail: Tail) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedRate::new(samples, tail)?))
    }

    /// The constant rate `m ≡ value` (`value ≥ 1`).
    pub fn constant(value: T) -> Result<Self> {
        if !(value >= T::one()) {
            return Err(RateError::Invalid(format!("constant rate must be >= 1, got {value}")));
        }
        Self::tabulated([(T::PI(), value)], Tail::Flat)
    }

    /// `m(ε) = max(1, 1/ε)`, the smallest rate any operator with `1 ∈ σ(T)` admits.
    pub fn reciprocal_floor() -> Self {
        Self::tabulated([(T::one(), T::one())], Tail::Reciprocal).expect("valid table")
    }

    pub fn eval(&self, eps: T) -> Result<T> {
        check_eps(eps)?;
        Ok(match self {
            Self::Poly { c, alpha } => *c * (T::PI() / eps).powf(*alpha),
            Self::Exp { alpha } => eps.powf(-*alpha).exp(),
            Self::Tabulated(t) => t.interp(eps).max(T::one()),
        })
    }

    /// `ln m(ε)`, finite even where `m(ε)` itself overflows.
    pub fn ln_eval(&self, eps: T) -> Result<T> {
        check_eps(eps)?;
        Ok(match self {
            Self::Poly { c, alpha } => c.ln() + *alpha * (T::PI().ln() - eps.ln()),
            Self::Exp { alpha } => eps.powf(-*alpha),
            Self::Tabulated(t) => t.ln_interp(eps).max(T::zero()),
        })
    }

    /// Whether the rate is strictly decreasing on all of `(0, π]`.
    pub fn is_strictly_decreasing(&self) -> bool {
        match self {
            Self::Poly { .. } | Self::Exp { .. } => true,
            Self::Tabulated(_) => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedKind {
    /// `m_log(ε) = m(ε) ln(1 + m(ε)/ε)`.
    MLog,
    /// `m_k(ε) = m(ε) (m(ε)/ε)^(1/k)`, `k ≥ 1`.
    MK(u32),
}

/// A rate function combined with one of the derived-rate transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedRate<T> {
    base: RateFunction<T>,
    kind: DerivedKind,
}

impl<T: Real> DerivedRate<T> {
    pub fn new(base: RateFunction<T>, kind: DerivedKind) -> Result<Self> {
        if kind == DerivedKind::MK(0) {
            return Err(RateError::Parameter("m_k needs k >= 1".into()));
        }
        Ok(Self { base, kind })
    }

    pub fn mlog(base: RateFunction<T>) -> Self {
        Self { base, kind: DerivedKind::MLog }
    }

    pub fn mk(base: RateFunction<T>, k: u32) -> Result<Self> {
        Self::new(base, DerivedKind::MK(k))
    }

    pub fn base(&self) -> &RateFunction<T> {
        &self.base
    }

    pub fn kind(&self) -> DerivedKind {
        self.kind
    }

    pub fn eval(&self, eps: T) -> Result<T> {
        let m = self.base.eval(eps)?;
        if !m.is_finite() {
            return Ok(self.ln_eval(eps)?.exp());
        }
        Ok(match self.kind {
            DerivedKind::MLog => m * (m / eps).ln_1p(),
            DerivedKind::MK(k) => m * (m / eps).powf(T::one() / T::lit(f64::from(k))),
        })
    }

    pub fn ln_eval(&self, eps: T) -> Result<T> {
        let ln_m = self.base.ln_eval(eps)?;
        let r = ln_m - eps.ln();
        Ok(match self.kind {
            DerivedKind::MLog => ln_m + softplus(r).ln(),
            DerivedKind::MK(k) => ln_m + r / T::lit(f64::from(k)),
        })
    }

    /// Inverse of the derived rate. For flat stretches the largest
    /// matching `ε` is returned.
    pub fn invert(&self, y: T) -> Result<T> {
        if !(y > T::zero()) || y.is_nan() {
            return Err(RateError::Parameter(format!("inversion target must be positive, got {y}")));
        }
        if y.is_infinite() {
            return Err(RateError::AboveRange(f64::INFINITY));
        }
        self.invert_ln(y.ln())
    }

    /// Inverse taking `ln y`, for targets beyond the floating-point range.
    pub fn invert_ln(&self, ln_y: T) -> Result<T> {
        if !ln_y.is_finite() {
            return Err(RateError::Parameter(format!("log-target must be finite, got {ln_y}")));
        }
        let tol = T::lit(INVERSION_REL_TOL);
        let pi = T::PI();
        let top = self.ln_eval(pi)?;
        if ln_y < top - tol {
            return Err(RateError::BelowRange { target: ln_y.to_f64_lossy().exp(), minimum: top.to_f64_lossy().exp() });
        }
        if ln_y <= top {
            return Ok(pi);
        }
        let mut lo = T::lit(INVERSION_EPS_MIN);
        if self.ln_eval(lo)? < ln_y {
            return Err(RateError::AboveRange(ln_y.to_f64_lossy().exp()));
        }
        let mut hi = pi;
        let mut collapsed = false;
        for _ in 0..INVERSION_MAX_ITER {
            let mid = ((lo.ln() + hi.ln()) * T::half()).exp();
            if mid <= lo || mid >= hi {
                collapsed = true;
                break;
            }
            if self.ln_eval(mid)? >= ln_y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let err = (self.ln_eval(lo)? - ln_y).abs();
        if err <= tol || collapsed {
            Ok(lo)
        } else {
            Err(RateError::NoConvergence(INVERSION_MAX_ITER))
        }
    }
}

/// Which half of the Tauberian theorem a prediction uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Boundary function `k` times continuously differentiable: rate `m_k^{-1}(cn)`.
    Ck(u32),
    /// Boundary function smooth with factorial derivative growth: rate `m_log^{-1}(cn) + 1/n`.
    Smooth,
}

impl Regime {
    pub fn derived_kind(self) -> DerivedKind {
        match self {
            Regime::Ck(k) => DerivedKind::MK(k),
            Regime::Smooth => DerivedKind::MLog,
        }
    }

    pub fn check_c<T: Real>(self, c: T) -> Result<()> {
        let ok = match self {
            Regime::Ck(0) => return Err(RateError::Parameter("C^k regime needs k >= 1".into())),
            Regime::Ck(_) => c > T::zero() && c.is_finite(),
            Regime::Smooth => c > T::zero() && c < T::one(),
        };
        if ok {
            Ok(())
        } else {
            Err(RateError::Parameter(match self {
                Regime::Smooth => format!("c = {c} must lie in (0, 1) for the smooth regime"),
                Regime::Ck(_) => format!("c = {c} must be positive"),
            }))
        }
    }
}

/// A decay prediction, or the admission that `cn` is still too small to
/// invert.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction<T> {
    Bound { epsilon: T, value: T },
    PreAsymptotic,
}

impl<T: Copy> Prediction<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Prediction::Bound { value, .. } => Some(*value),
            Prediction::PreAsymptotic => None,
        }
    }

    pub fn epsilon(&self) -> Option<T> {
        match self {
            Prediction::Bound { epsilon, .. } => Some(*epsilon),
            Prediction::PreAsymptotic => None,
        }
    }
}

/// Predicted order of decay of `‖x_n‖`: `m_k^{-1}(cn)` in the `C^k` regime,
/// `m_log^{-1}(cn) + 1/n` in the smooth regime.
pub fn predicted_bound<T: Real>(m: &RateFunction<T>, regime: Regime, c: T, n: u64) -> Result<Prediction<T>> {
    regime.check_c(c)?;
    if n == 0 {
        return Err(RateError::Parameter("n must be >= 1".into()));
    }
    let n = T::from_u64(n).expect("u64 representable");
    predicted_bound_at(m, regime, c * n, n)
}

/// [`predicted_bound`] with the inversion target `cn` supplied directly.
pub fn predicted_bound_at<T: Real>(m: &RateFunction<T>, regime: Regime, target: T, n: T) -> Result<Prediction<T>> {
    let d = DerivedRate::new(m.clone(), regime.derived_kind())?;
    match d.invert(target) {
        Ok(epsilon) => {
            let value = match regime {
                Regime::Ck(_) => epsilon,
                Regime::Smooth => epsilon + n.recip(),
            };
            Ok(Prediction::Bound { epsilon, value })
        }
        Err(RateError::BelowRange { .. }) => Ok(Prediction::PreAsymptotic),
        Err(e) => Err(e),
    }
}

/// The error budget from the smooth-regime proof at a given `(ε, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofBudget<T> {
    /// `⌊cn / m(ε)⌋`, the number of integrations by parts.
    pub k_opt: u64,
    /// `m(ε) exp(−cn/m(ε))`.
    pub d: T,
    /// `m(ε) / n²`.
    pub e: T,
}

impl<T: Real> ProofBudget<T> {
    pub fn total(&self) -> T {
        self.d + self.e
    }
}

pub fn proof_budget<T: Real>(m: &RateFunction<T>, eps: T, n: u64, c: T) -> Result<ProofBudget<T>> {
    if !(c > T::zero() && c < T::one()) {
        return Err(RateError::Parameter(format!("c = {c} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(RateError::Parameter("n must be >= 1".into()));
    }
    let mv = m.eval(eps)?;
    let nf = T::from_u64(n).expect("u64 representable");
    let ratio = c * nf / mv;
    Ok(ProofBudget { k_opt: ratio.floor().to_u64().unwrap_or(0), d: mv * (-ratio).exp(), e: mv / (nf * nf) })
}
