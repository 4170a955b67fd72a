use proptest::prelude::*;
use tauber::analysis::{certify_decay, certify_series, check_hypotheses, AnalysisError, DecayVerdict, Subject, Verdict};
use tauber::{AnalysisConfig, DecayReport, Operator, OperatorSpec, OrbitSeries};

fn ladder_report(calib: (u64, u64)) -> DecayReport {
    let cfg = AnalysisConfig::with_windows(0.5, calib, (201, 1000));
    certify_decay(&OperatorSpec::linear_ladder(4000), &cfg).unwrap()
}

#[test]
fn fitted_constant_is_stable_under_calibration_doubling() {
    let a = ladder_report((50, 100)).certificate.fitted_c.unwrap();
    let b = ladder_report((50, 200)).certificate.fitted_c.unwrap();
    assert!((a - b).abs() <= 0.1 * a, "{a} vs {b}");
}

#[test]
fn scale_equivariance() {
    let cfg = AnalysisConfig::default();
    let op: Operator = OperatorSpec::spectral_curve(2.0, 400).build().unwrap();
    let orbit = op.orbit_decay(1000).unwrap();
    let env = op.profile(&cfg.angle_grid()).unwrap().envelope;
    let base = certify_series(&orbit, &env, &cfg).unwrap();
    for lambda in [1e-3, 0.7, 42.0] {
        let scaled = OrbitSeries { values: orbit.values.iter().map(|v| v * lambda).collect(), ..orbit.clone() };
        let s = certify_series(&scaled, &env, &cfg).unwrap();
        assert_eq!(s.verdict, base.verdict);
        let (c0, c1) = (base.fitted_c.unwrap(), s.fitted_c.unwrap());
        assert!((c1 - lambda * c0).abs() <= 1e-12 * c1);
        let (e0, e1) = (base.empirical_exponent.unwrap().exponent, s.empirical_exponent.unwrap().exponent);
        assert!((e0 - e1).abs() <= 1e-9);
    }
}

#[test]
fn report_serializes_and_exports() {
    let r = ladder_report((50, 100));
    let json = serde_json::to_string(&r).unwrap();
    let back: DecayReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["verdict"], "certified");
    assert_eq!(v["config"]["c"], 0.5);
    let csv = r.to_csv();
    assert_eq!(csv.lines().next(), Some("n,d_n,predicted,ratio"));
    assert_eq!(csv.lines().count(), 1 + r.certificate.n.len());
}

#[test]
fn non_power_bounded_operator_is_refused() {
    let jordan = OperatorSpec::Dense { entries: vec![vec![[1.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]] };
    match certify_decay(&jordan, &AnalysisConfig::default()) {
        Err(AnalysisError::Refused { hypothesis }) => assert!(hypothesis.contains("power-bounded"), "{hypothesis}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn short_windows_are_inconclusive() {
    let cfg = AnalysisConfig { hypothesis_window: 20, ..AnalysisConfig::default() };
    let op: Operator = OperatorSpec::diagonal_real(&[0.5]).build().unwrap();
    let h = check_hypotheses(Subject::Operator(&op), &cfg);
    assert_eq!(h.partial_sums_bounded.verdict, Verdict::Inconclusive);
    assert!(h.any_inconclusive());
}

fn real_diagonal() -> impl Strategy<Value = OperatorSpec> {
    prop::collection::vec(0.0f64..0.9999, 50..400).prop_map(|v| OperatorSpec::diagonal_real(&v))
}

fn curve() -> impl Strategy<Value = OperatorSpec> {
    (1.0f64..3.0, 100usize..600).prop_map(|(a, n)| OperatorSpec::spectral_curve(a, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn model_families_are_never_violated(spec in prop_oneof![real_diagonal(), curve()]) {
        let report = certify_decay(&spec, &AnalysisConfig::default()).unwrap();
        prop_assert_ne!(report.verdict(), DecayVerdict::Violated);
        for w in &report.certificate.d {
            prop_assert!(*w >= 0.0);
        }
    }
}
