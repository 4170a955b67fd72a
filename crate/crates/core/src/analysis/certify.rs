//! Calibrate-then-validate certification of `d_n = O(m_log^{-1}(cn) + 1/n)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hypotheses::{check_hypotheses, HypothesisReport, Subject};
use super::slope::{slope_estimate, SlopeFit};
use super::{AnalysisConfig, AnalysisError, Result};
use crate::kernels::{BoundarySampler, Sequence};
use crate::operators::{fit_envelope, Operator, OperatorSpec, OrbitSeries};
use crate::rates::{predicted_bound, RateFunction, Regime};
use crate::scalar::Real;

/// Relative slack on `d_n ≤ C · predicted(n)` to absorb rounding.
const VALIDATION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Certified,
    Violated,
    PreAsymptotic,
}

/// The numeric core of a certification: predicted bounds, the fitted
/// constant and the verdict, over `calib.0 ≤ n ≤ valid.1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SeriesCertificate<T> {
    pub n: Vec<u64>,
    pub d: Vec<T>,
    /// `ε_n = m_log^{-1}(cn)`; `None` where pre-asymptotic.
    pub schedule: Vec<Option<T>>,
    /// `ε_n + 1/n`.
    pub predicted: Vec<Option<T>>,
    /// `d_n / predicted(n)`.
    pub ratio: Vec<Option<T>>,
    /// `max_{n ∈ calib} d_n / predicted(n)`.
    pub fitted_c: Option<T>,
    /// `max_{n ∈ valid} d_n / (C · predicted(n))`; at most 1 when certified.
    pub max_validation_ratio: Option<T>,
    pub empirical_exponent: Option<SlopeFit<T>>,
    pub verdict: DecayVerdict,
}

impl<T: Real> SeriesCertificate<T> {
    /// `n,d_n,predicted,ratio` rows; missing values are empty fields.
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<T>| v.map(|x| format!("{:.16e}", x.to_f64_lossy())).unwrap_or_default();
        let mut out = String::from("n,d_n,predicted,ratio\n");
        for i in 0..self.n.len() {
            let _ = writeln!(out, "{},{},{},{}", self.n[i], fmt(Some(self.d[i])), fmt(self.predicted[i]), fmt(self.ratio[i]));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DecayReport<T> {
    pub subject: String,
    pub config: AnalysisConfig<T>,
    pub hypotheses: HypothesisReport<T>,
    pub orbit: OrbitSeries<T>,
    pub envelope: RateFunction<T>,
    #[serde(flatten)]
    pub certificate: SeriesCertificate<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> DecayReport<T> {
    pub fn verdict(&self) -> DecayVerdict {
        self.certificate.verdict
    }

    pub fn to_csv(&self) -> String {
        self.certificate.to_csv()
    }
}

fn slope_window<T: Real>(orbit: &OrbitSeries<T>, cfg: &AnalysisConfig<T>) -> Option<(u64, u64)> {
    let last = orbit.end().checked_sub(1)?;
    let fits = |(a, b): (u64, u64)| a >= 1 && a >= orbit.start && b <= last && b >= 2 * a;
    [cfg.slope_window, cfg.valid].into_iter().find(|&w| fits(w))
}

/// Fit `C` on the calibration window and test `d_n ≤ C · predicted(n)` on
/// the validation window.
pub fn certify_series<T: Real>(orbit: &OrbitSeries<T>, envelope: &RateFunction<T>, cfg: &AnalysisConfig<T>) -> Result<SeriesCertificate<T>> {
    cfg.validate()?;
    let (c0, _) = cfg.calib;
    let (v0, v1) = cfg.valid;
    if orbit.start > c0 || orbit.end() <= v1 {
        return Err(AnalysisError::Input(format!("orbit covers [{}, {}] but windows need [{c0}, {v1}]", orbit.start, orbit.end().saturating_sub(1))));
    }
    let n: Vec<u64> = (c0..=v1).collect();
    let d: Vec<T> = n.iter().map(|&k| orbit.get(k).expect("covered")).collect();
    let preds = n.par_iter().map(|&k| predicted_bound(envelope, Regime::Smooth, cfg.c, k)).collect::<std::result::Result<Vec<_>, _>>()?;
    let schedule: Vec<Option<T>> = preds.iter().map(|p| p.epsilon()).collect();
    let predicted: Vec<Option<T>> = preds.iter().map(|p| p.value()).collect();
    let ratio: Vec<Option<T>> = d.iter().zip(&predicted).map(|(&x, p)| p.map(|p| x / p)).collect();

    let in_calib = |k: u64| k <= cfg.calib.1;
    let pre_asymptotic = predicted.iter().any(Option::is_none);
    let fitted_c = if predicted.iter().zip(&n).filter(|(_, &k)| in_calib(k)).any(|(p, _)| p.is_none()) {
        None
    } else {
        Some(n.iter().zip(&ratio).filter(|(&k, _)| in_calib(k)).map(|(_, r)| r.expect("defined")).fold(T::zero(), T::max))
    };

    let mut max_validation_ratio = None;
    let mut violated = false;
    if let Some(cfit) = fitted_c {
        let slack = T::one() + T::lit(VALIDATION_SLACK);
        let mut worst = T::zero();
        for ((&k, &x), p) in n.iter().zip(&d).zip(&predicted) {
            if k < v0 {
                continue;
            }
            let Some(p) = p else { continue };
            let bound = cfit * *p;
            if x > bound * slack {
                violated = true;
            }
            let r = if bound > T::zero() {
                x / bound
            } else if x > T::zero() {
                T::infinity()
            } else {
                T::zero()
            };
            worst = worst.max(r);
        }
        max_validation_ratio = Some(worst);
    }
    let verdict = if violated {
        DecayVerdict::Violated
    } else if pre_asymptotic {
        DecayVerdict::PreAsymptotic
    } else {
        DecayVerdict::Certified
    };

    let empirical_exponent = slope_window(orbit, cfg).and_then(|w| slope_estimate(&orbit.values, orbit.start, w).ok());
    Ok(SeriesCertificate { n, d, schedule, predicted, ratio, fitted_c, max_validation_ratio, empirical_exponent, verdict })
}

fn refuse_on_failures<T: Real>(h: &HypothesisReport<T>) -> Result<()> {
    let failures = h.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(AnalysisError::Refused { hypothesis: failures.join("; ") })
    }
}

fn common_warnings<T: Real>(h: &HypothesisReport<T>) -> Vec<String> {
    let mut w = Vec::new();
    if h.any_inconclusive() {
        w.push("some hypotheses are inconclusive on the chosen window".into());
    }
    w
}

/// Certify the orbit `Tⁿ(I−T)` of a materialized operator.
pub fn certify_operator<T: Real>(op: &Operator<T>, label: &str, cfg: &AnalysisConfig<T>) -> Result<DecayReport<T>> {
    cfg.validate()?;
    let hypotheses = check_hypotheses(Subject::Operator(op), cfg);
    refuse_on_failures(&hypotheses)?;
    let n_max = match op {
        Operator::Normal(_) => cfg.valid.1.max(cfg.slope_window.1),
        Operator::Matrix(_) => cfg.valid.1,
    };
    let orbit = op.orbit_decay(n_max)?;
    let profile = op.profile(&cfg.angle_grid())?;
    let certificate = certify_series(&orbit, &profile.envelope, cfg)?;
    let mut warnings = common_warnings(&hypotheses);
    if let Operator::Normal(e) = op {
        if cfg.valid.1 as usize > e.len() / 10 {
            warnings.push(format!(
                "validation window end {} exceeds N/10 = {}: a finite matrix eventually decays exponentially",
                cfg.valid.1,
                e.len() / 10
            ));
        }
    }
    Ok(DecayReport { subject: label.to_string(), config: cfg.clone(), hypotheses, orbit, envelope: profile.envelope, certificate, warnings })
}

pub fn certify_decay<T: Real>(spec: &OperatorSpec, cfg: &AnalysisConfig<T>) -> Result<DecayReport<T>> {
    let op = spec.build::<T>()?;
    let label = match spec {
        OperatorSpec::Dense { .. } => "dense",
        OperatorSpec::Diagonal { .. } => "diagonal",
        OperatorSpec::SpectralCurve { .. } => "spectral_curve",
        OperatorSpec::Shift { .. } => "shift",
    };
    certify_operator(&op, label, cfg)
}

/// Certify `‖x_n‖` for a sequence with boundary function `F`. The envelope
/// is fitted to `‖F(e^{iθ})‖ / |θ|`, the smallest `m` compatible with the
/// zeroth-order domination bound.
pub fn certify_sequence<T: Real>(seq: &Sequence<T>, boundary: &BoundarySampler<T>, cfg: &AnalysisConfig<T>) -> Result<DecayReport<T>> {
    cfg.validate()?;
    let hypotheses = check_hypotheses(Subject::Sequence(seq), cfg);
    refuse_on_failures(&hypotheses)?;
    let values: Vec<T> = seq.terms(cfg.valid.1 as usize + 1).iter().map(|x| seq.norm(x)).collect();
    let sup = values.iter().copied().fold(T::zero(), T::max);
    let orbit = OrbitSeries { start: 0, values, power_bound: sup };
    let samples: Vec<(T, T)> = cfg
        .angle_grid()
        .par_iter()
        .map(|&th| {
            let v = boundary.shape().norm(&boundary.eval(th));
            if v.is_finite() {
                Ok((th, v / th.abs()))
            } else {
                Err(AnalysisError::Input(format!("boundary function is not finite at theta = {th}")))
            }
        })
        .collect::<Result<_>>()?;
    let envelope = fit_envelope(&samples)?;
    let certificate = certify_series(&orbit, &envelope, cfg)?;
    let warnings = common_warnings(&hypotheses);
    Ok(DecayReport { subject: seq.label().to_string(), config: cfg.clone(), hypotheses, orbit, envelope, certificate, warnings })
}
