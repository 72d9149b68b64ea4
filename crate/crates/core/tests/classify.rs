use katolab_core::classification::{classify_measure, ClassificationConfig, Criterion, Verdict};
use katolab_core::{HeatKernelModel, Measure};

fn verdicts(rep: &katolab_core::classification::ClassificationReport) -> Vec<Verdict> {
    rep.entries.iter().map(|e| e.verdict_k).collect()
}

#[test]
fn brownian_lebesgue_d3_threshold() {
    let model = HeatKernelModel::gaussian(3).unwrap();
    let rep = classify_measure(&Measure::lebesgue(3), &model, &[1.0, 2.0, 2.8, 3.0, 3.5], &ClassificationConfig::default())
        .unwrap();
    assert_eq!(verdicts(&rep), [Verdict::In, Verdict::In, Verdict::In, Verdict::Out, Verdict::Out]);
    for e in &rep.entries[..3] {
        for c in Criterion::ALL {
            assert_eq!(e.criterion_verdict(c), Some(Verdict::In), "p={} {}", e.p, c.name());
        }
        let exact = (3.0 - e.p) / (2.0 * e.p);
        let d = e.delta_hat.expect("finite entries carry a decay order");
        assert!((d.delta - exact).abs() <= 0.15 * exact, "p={} delta={}", e.p, d.delta);
    }
    for e in &rep.entries[3..] {
        assert!(e.delta_hat.is_none());
    }
}

#[test]
fn sphere_d3_threshold_and_slope() {
    let model = HeatKernelModel::gaussian(3).unwrap();
    let mu = Measure::sphere(vec![0.0; 3], 1.0, 1.0).unwrap();
    let rep = classify_measure(&mu, &model, &[1.5, 2.5], &ClassificationConfig::default()).unwrap();
    assert_eq!(verdicts(&rep), [Verdict::In, Verdict::Out]);
    assert!((rep.entries[0].fitted_slope - 0.5).abs() <= 0.05, "{}", rep.entries[0].fitted_slope);
    assert_eq!(rep.eta, Some(2.0));
}

#[test]
fn dirac_d1_localized_criteria_disagree() {
    let model = HeatKernelModel::gaussian(1).unwrap();
    let mu = Measure::dirac(vec![0.0], 1.0).unwrap();
    let rep = classify_measure(&mu, &model, &[1.0], &ClassificationConfig::default()).unwrap();
    let e = &rep.entries[0];
    assert_eq!(e.criterion_verdict(Criterion::Green), Some(Verdict::In));
    assert_eq!(e.criterion_verdict(Criterion::GlobalSemigroup), Some(Verdict::In));
    assert_eq!(e.criterion_verdict(Criterion::GlobalResolvent), Some(Verdict::In));
    assert_eq!(e.criterion_verdict(Criterion::ResolventAny), Some(Verdict::Out));
    assert_eq!(e.criterion_verdict(Criterion::HeatAny), Some(Verdict::Out));
    assert!(!rep.findings.is_empty());
}

#[test]
fn empty_measure_is_in_for_every_p() {
    let model = HeatKernelModel::gaussian(3).unwrap();
    let rep = classify_measure(&Measure::zero(3), &model, &[1.0, 3.0, 10.0], &ClassificationConfig::default()).unwrap();
    assert_eq!(verdicts(&rep), [Verdict::In; 3]);
    for e in &rep.entries {
        for row in &e.criteria {
            assert!(row.samples.iter().all(|(_, s)| s.value == 0.0));
        }
    }
}

#[test]
fn ahlfors_flip_at_eta() {
    let model = HeatKernelModel::gaussian(3).unwrap();
    let cfg = ClassificationConfig { criteria: vec![Criterion::Green], ..Default::default() };
    for eta in [1.0, 2.0, 3.0] {
        let mu = Measure::ahlfors(3, eta, 1.0, 2.0, 1.0).unwrap();
        let ps: Vec<f64> = [-0.5, -0.1, 0.1, 0.5].iter().map(|d| eta + d).filter(|p| *p >= 1.0).collect();
        let rep = classify_measure(&mu, &model, &ps, &cfg).unwrap();
        for e in &rep.entries {
            let expect = if e.p < eta { Verdict::In } else { Verdict::Out };
            assert_eq!(e.verdict_k, expect, "eta={eta} p={}", e.p);
        }
    }
}
