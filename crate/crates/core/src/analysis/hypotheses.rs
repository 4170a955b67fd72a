//! Finite-window checks of the Tauberian hypotheses.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisConfig, Verdict, ABEL_DELTA, DOM_FUN_K_MAX, MIN_HYPOTHESIS_WINDOW, PARTIAL_SUM_GROWTH_LIMIT};
use crate::kernels::Sequence;
use crate::operators::{operator_norm, CMatrix, Operator};
use crate::scalar::Real;

/// What the hypotheses are checked on.
#[derive(Clone, Copy, Debug)]
pub enum Subject<'a, T> {
    Sequence(&'a Sequence<T>),
    /// The orbit `x_n = Tⁿ(I−T)`.
    Operator(&'a Operator<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check<T> {
    pub verdict: Verdict,
    pub estimate: Option<T>,
    pub detail: String,
}

impl<T> Check<T> {
    fn new(verdict: Verdict, estimate: Option<T>, detail: impl Into<String>) -> Self {
        Self { verdict, estimate, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HypothesisReport<T> {
    pub window: u64,
    /// `sup_{n ≤ window} ‖s_n‖`, judged by its log-log growth.
    pub partial_sums_bounded: Check<T>,
    pub partial_sum_growth: T,
    /// Operators only: `sup_{n ≤ window} ‖Tⁿ‖`.
    pub power_bounded: Option<Check<T>>,
    /// Every flagged angle, including those attached to `θ = 0`.
    pub singularity_locations: Vec<T>,
    /// Flagged angles not connected to `θ = 0` on the grid.
    pub singularities_away_from_one: Vec<T>,
    pub boundary_function: Check<T>,
    /// Operators only: `C_k = max_θ ‖F^{(k)}‖ / (k! |θ| m(|θ|)^{k+1})` for `k ≤ 5`.
    pub dom_fun_constants: Vec<T>,
    pub dom_fun_constant: Option<T>,
}

impl<T: Real> HypothesisReport<T> {
    /// Names of the failed hypotheses.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.partial_sums_bounded.verdict == Verdict::Fails {
            out.push("partial sums unbounded".to_string());
        }
        if self.power_bounded.as_ref().is_some_and(|c| c.verdict == Verdict::Fails) {
            out.push("operator not power-bounded".to_string());
        }
        if self.boundary_function.verdict == Verdict::Fails {
            out.push(format!(
                "boundary singularity away from theta = 0 (near theta = {})",
                self.singularities_away_from_one.iter().map(|t| t.abs()).fold(T::zero(), T::max)
            ));
        }
        out
    }

    pub fn any_inconclusive(&self) -> bool {
        self.partial_sums_bounded.verdict == Verdict::Inconclusive
            || self.power_bounded.as_ref().is_some_and(|c| c.verdict == Verdict::Inconclusive)
            || self.boundary_function.verdict == Verdict::Inconclusive
    }
}

/// `‖s_n‖` for `0 ≤ n ≤ window`.
fn partial_sum_norms<T: Real>(subject: Subject<'_, T>, window: u64) -> Vec<T> {
    let one = Complex::new(T::one(), T::zero());
    match subject {
        Subject::Sequence(seq) => {
            let mut acc = vec![Complex::new(T::zero(), T::zero()); seq.shape().len()];
            seq.terms(window as usize + 1)
                .into_iter()
                .map(|x| {
                    acc.iter_mut().zip(&x).for_each(|(a, b)| *a = *a + *b);
                    seq.norm(&acc)
                })
                .collect()
        }
        // s_n = I − T^{n+1}
        Subject::Operator(Operator::Normal(eig)) => {
            let mut p = eig.clone();
            (0..=window)
                .map(|n| {
                    if n > 0 {
                        p.iter_mut().zip(eig).for_each(|(a, b)| *a = *a * b);
                    }
                    p.iter().map(|z| (one - z).norm()).fold(T::zero(), T::max)
                })
                .collect()
        }
        Subject::Operator(Operator::Matrix(m)) => {
            let id = CMatrix::identity(m.rows());
            let mut p = m.clone();
            (0..=window)
                .map(|n| {
                    if n > 0 {
                        p = m.mul(&p);
                    }
                    operator_norm(&id.lincomb(one, &p, -one)).unwrap_or(T::infinity())
                })
                .collect()
        }
    }
}

/// Log-log slope of the running maximum over the last decade of the window.
fn running_max_growth<T: Real>(norms: &[T]) -> T {
    let mut running = T::zero();
    let maxes: Vec<T> = norms
        .iter()
        .map(|&v| {
            running = running.max(v);
            running
        })
        .collect();
    let w = maxes.len().saturating_sub(1);
    let lo = (w / 10).max(1);
    let pts = (lo..=w).map(|n| (T::from_usize_lossy(n + 1), maxes[n])).filter(|p| p.1 > T::zero() && p.1.is_finite());
    if maxes.iter().any(|v| !v.is_finite()) {
        return T::infinity();
    }
    super::slope::fit_log_log(pts).map(|f| f.0).unwrap_or(T::neg_infinity())
}

/// `‖G(r e^{iθ})‖` with `G(λ) = Σ x_n λ^{−n−1}` and `r = 1 + δ`.
fn abel_transform_norm<T: Real>(seq: &Sequence<T>, terms: &[Vec<Complex<T>>], theta: T) -> T {
    let r = T::one() + T::lit(ABEL_DELTA);
    let w = Complex::from_polar(r, theta).inv();
    let mut acc = vec![Complex::new(T::zero(), T::zero()); seq.shape().len()];
    let mut p = w;
    for x in terms {
        acc.iter_mut().zip(x).for_each(|(a, b)| *a = *a + *b * p);
        p = p * w;
    }
    seq.norm(&acc)
}

/// Flagged angles not explained by a singularity at `λ = 1`.
///
/// `scores` holds `(θ, ‖·‖ |θ| / threshold)`; a point is flagged when its
/// score exceeds 1 or is not finite. On each side of 0 the flagged points
/// form runs in order of `|θ|`. The first run is attributed to `λ = 1` when
/// it starts below `attach`, the geometric midpoint of the grid's `|θ|`
/// range. Every other flagged point is reported.
fn away_from_one<T: Real>(scores: &[(T, T)], attach: T) -> Vec<T> {
    let flagged = |s: T| !(s <= T::one());
    let mut out = Vec::new();
    for positive in [true, false] {
        let mut side: Vec<(T, T)> = scores.iter().copied().filter(|p| p.0 != T::zero() && (p.0 > T::zero()) == positive).collect();
        side.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).expect("finite grid"));
        let mut runs: Vec<Vec<(T, T)>> = Vec::new();
        let mut in_run = false;
        for p in side {
            if flagged(p.1) {
                if !in_run {
                    runs.push(Vec::new());
                    in_run = true;
                }
                runs.last_mut().expect("run started").push(p);
            } else {
                in_run = false;
            }
        }
        for (i, run) in runs.iter().enumerate() {
            if !(i == 0 && run[0].0.abs() <= attach) {
                out.extend(run.iter().map(|p| p.0));
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    out
}

/// Check boundedness of partial sums, power-boundedness (operators), the
/// absence of boundary singularities away from 1, and fit the derivative
/// domination constant (operators).
pub fn check_hypotheses<T: Real>(subject: Subject<'_, T>, cfg: &AnalysisConfig<T>) -> HypothesisReport<T> {
    let window = cfg.hypothesis_window.max(1);
    let short = window < MIN_HYPOTHESIS_WINDOW;
    let grade = |ok: bool| {
        if short {
            Verdict::Inconclusive
        } else if ok {
            Verdict::HoldsOnWindow
        } else {
            Verdict::Fails
        }
    };

    let norms = partial_sum_norms(subject, window);
    let sup = norms.iter().copied().fold(T::zero(), T::max);
    let growth = running_max_growth(&norms);
    let partial_sums_bounded =
        Check::new(grade(growth <= T::lit(PARTIAL_SUM_GROWTH_LIMIT)), Some(sup), format!("sup_(n<={window}) |s_n| = {sup}, log-log growth {growth}"));

    let power_bounded = match subject {
        Subject::Operator(op) => Some(match op.power_bound(window) {
            Ok(pb) => Check::new(
                grade(pb.bounded),
                Some(pb.bound),
                format!("sup_(n<={window}) |T^n| = {}, growth exponent {}", pb.bound, pb.growth_exponent),
            ),
            Err(e) => Check::new(if short { Verdict::Inconclusive } else { Verdict::Fails }, None, e.to_string()),
        }),
        Subject::Sequence(_) => None,
    };

    let grid = cfg.angle_grid();
    let scores: Vec<(T, T)> = match subject {
        Subject::Operator(op) => grid
            .par_iter()
            .map(|&th| {
                let s = op.resolvent_norm(th).map_or(T::infinity(), |v| v * th.abs() / cfg.scan_threshold);
                (th, s)
            })
            .collect(),
        Subject::Sequence(seq) => {
            let len = (window as usize + 1).max((T::lit(40.0) / T::lit(ABEL_DELTA)).to_usize().unwrap_or(0));
            let terms = seq.terms(len);
            grid.par_iter().map(|&th| (th, abel_transform_norm(seq, &terms, th) * th.abs() / cfg.scan_threshold)).collect()
        }
    };
    let flagged: Vec<T> = scores.iter().filter(|p| !(p.1 <= T::one())).map(|p| p.0).collect();
    let away = away_from_one(&scores, (cfg.theta_min * cfg.theta_max).sqrt());
    let boundary_function = Check::new(
        grade(away.is_empty()),
        away.iter().map(|t| t.abs()).reduce(T::max),
        format!("{} flagged angles, {} away from theta = 0", flagged.len(), away.len()),
    );

    let (dom_fun_constants, dom_fun_constant) = match subject {
        Subject::Operator(op) if away.is_empty() => dom_fun_fit(op, &grid),
        _ => (Vec::new(), None),
    };

    HypothesisReport {
        window,
        partial_sums_bounded,
        partial_sum_growth: growth,
        power_bounded,
        singularity_locations: flagged,
        singularities_away_from_one: away,
        boundary_function,
        dom_fun_constants,
        dom_fun_constant,
    }
}

fn dom_fun_fit<T: Real>(op: &Operator<T>, grid: &[T]) -> (Vec<T>, Option<T>) {
    let Ok(profile) = op.profile(grid) else {
        return (Vec::new(), None);
    };
    let m = profile.envelope;
    let consts: Option<Vec<T>> = (0..=DOM_FUN_K_MAX)
        .map(|k| {
            let kf = (1..=k).fold(T::one(), |a, i| a * T::lit(f64::from(i)));
            grid.par_iter()
                .map(|&th| {
                    let f = op.boundary_derivative_norm(k, th).ok()?;
                    let mv = m.eval(th.abs()).ok()?;
                    Some(f / (kf * th.abs() * mv.powi(k as i32 + 1)))
                })
                .try_reduce(T::zero, |a, b| Some(a.max(b)))
        })
        .collect();
    match consts {
        Some(c) if c.iter().all(|v| v.is_finite()) => {
            let max = c.iter().copied().fold(T::zero(), T::max);
            (c, Some(max))
        }
        Some(c) => (c, None),
        None => (Vec::new(), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorSpec;

    fn cfg() -> AnalysisConfig<f64> {
        AnalysisConfig { grid: 64, ..AnalysisConfig::default() }
    }

    #[test]
    fn ones_have_unbounded_partial_sums() {
        let r = check_hypotheses(Subject::Sequence(&Sequence::ones()), &cfg());
        assert_eq!(r.partial_sums_bounded.verdict, Verdict::Fails);
        assert_eq!(r.failures(), vec!["partial sums unbounded".to_string()]);
        assert_eq!(r.boundary_function.verdict, Verdict::HoldsOnWindow);
    }

    #[test]
    fn alternating_flags_minus_one() {
        let r = check_hypotheses(Subject::Sequence(&Sequence::alternating()), &cfg());
        assert_eq!(r.partial_sums_bounded.verdict, Verdict::HoldsOnWindow);
        assert_eq!(r.boundary_function.verdict, Verdict::Fails);
        assert!(r.singularities_away_from_one.iter().any(|t| (t.abs() - std::f64::consts::PI).abs() < 0.1));
    }

    #[test]
    fn half_diagonal_holds() {
        let op = OperatorSpec::diagonal_real(&[0.5]).build::<f64>().unwrap();
        let r = check_hypotheses(Subject::Operator(&op), &cfg());
        assert!(r.failures().is_empty());
        assert!(!r.any_inconclusive());
        assert_eq!(r.power_bounded.unwrap().estimate, Some(1.0));
        assert!(r.singularity_locations.is_empty());
        let c = r.dom_fun_constant.unwrap();
        assert!(c > 0.0 && c <= 2.0, "{c}");
    }

    #[test]
    fn jordan_block_fails_power_bound() {
        let op = OperatorSpec::Dense { entries: vec![vec![[1.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]] }.build::<f64>().unwrap();
        let cfg = AnalysisConfig { hypothesis_window: 200, ..cfg() };
        let r = check_hypotheses(Subject::Operator(&op), &cfg);
        assert!(r.failures().contains(&"operator not power-bounded".to_string()));
    }

    #[test]
    fn tangential_curve_singularity_is_attached_to_one() {
        let op = OperatorSpec::spectral_curve(2.0, 500).build::<f64>().unwrap();
        let r = check_hypotheses(Subject::Operator(&op), &cfg());
        assert!(!r.singularity_locations.is_empty());
        assert!(r.singularities_away_from_one.is_empty(), "{:?} / {:?}", r.singularities_away_from_one, r.singularity_locations);
        assert!(r.failures().is_empty());
    }

    #[test]
    fn short_window_is_inconclusive() {
        let c = AnalysisConfig { hypothesis_window: 50, ..cfg() };
        let r = check_hypotheses(Subject::Sequence(&Sequence::ones()), &c);
        assert_eq!(r.partial_sums_bounded.verdict, Verdict::Inconclusive);
        assert!(r.failures().is_empty());
        assert!(r.any_inconclusive());
    }
}
