use erbench_core::metrics::{pair_metrics, PairMetric};
use erbench_core::ConfusionMatrix;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = ConfusionMatrix> {
    (0u64..200, 0u64..200, 0u64..200, 0u64..5000).prop_map(|(tp, fp, fn_, tn)| ConfusionMatrix::new(tp, fp, fn_, tn))
}

fn value(m: &ConfusionMatrix, metric: PairMetric) -> Option<f64> {
    metric.evaluate::<f64>(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn identities_hold(m in matrix()) {
        let precision = value(&m, PairMetric::Precision);
        let recall = value(&m, PairMetric::Recall);
        if let (Some(f1), Some(fs)) = (value(&m, PairMetric::F1), value(&m, PairMetric::FStar)) {
            prop_assert!((f1 - 2.0 * fs / (1.0 + fs)).abs() < 1e-12);
        }
        if let (Some(p), Some(r)) = (precision, recall) {
            let fm = value(&m, PairMetric::FowlkesMallows).unwrap();
            prop_assert!((fm - (p * r).sqrt()).abs() < 1e-12);
        }
        if let Some(mcc) = value(&m, PairMetric::Mcc) {
            prop_assert!((-1.0..=1.0).contains(&mcc));
        }
        for metric in [
            PairMetric::Precision,
            PairMetric::Recall,
            PairMetric::F1,
            PairMetric::FStar,
            PairMetric::Accuracy,
            PairMetric::FowlkesMallows,
            PairMetric::ReductionRatio,
            PairMetric::Specificity,
        ] {
            if let Some(v) = value(&m, metric) {
                prop_assert!((0.0..=1.0).contains(&v), "{metric} = {v}");
            }
        }
    }

    #[test]
    fn accuracy_is_computed_but_flagged(m in matrix()) {
        let all = pair_metrics::<f64>(&m);
        let accuracy = all.iter().find(|v| v.name == "accuracy").unwrap();
        prop_assert!(accuracy.unreliable);
        if m.total() > 0 {
            prop_assert!(accuracy.value.is_some());
        }
    }

    #[test]
    fn single_and_double_precision_agree(m in matrix()) {
        for metric in PairMetric::ALL {
            let (a, b) = (metric.evaluate::<f64>(&m), metric.evaluate::<f32>(&m));
            prop_assert_eq!(a.is_some(), b.is_some());
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!((a - b as f64).abs() < 1e-4);
            }
        }
    }
}
