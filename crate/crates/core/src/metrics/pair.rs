//! Pair-based metrics computed from a confusion matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::ConfusionMatrix;
use crate::error::Error;
use crate::scalar::Scalar;

/// Confusion matrix cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Tp,
    Fp,
    Fn,
    Tn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PairMetric {
    Precision,
    Recall,
    F1,
    FStar,
    Accuracy,
    FowlkesMallows,
    Mcc,
    ReductionRatio,
    Specificity,
}

impl PairMetric {
    pub const ALL: [PairMetric; 9] = [
        PairMetric::Precision,
        PairMetric::Recall,
        PairMetric::F1,
        PairMetric::FStar,
        PairMetric::Accuracy,
        PairMetric::FowlkesMallows,
        PairMetric::Mcc,
        PairMetric::ReductionRatio,
        PairMetric::Specificity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairMetric::Precision => "precision",
            PairMetric::Recall => "recall",
            PairMetric::F1 => "f1",
            PairMetric::FStar => "fStar",
            PairMetric::Accuracy => "accuracy",
            PairMetric::FowlkesMallows => "fowlkesMallows",
            PairMetric::Mcc => "mcc",
            PairMetric::ReductionRatio => "reductionRatio",
            PairMetric::Specificity => "specificity",
        }
    }

    /// Cells the metric reads.
    pub fn reads(self) -> &'static [Cell] {
        use Cell::*;
        match self {
            PairMetric::Precision => &[Tp, Fp],
            PairMetric::Recall => &[Tp, Fn],
            PairMetric::F1 | PairMetric::FStar | PairMetric::FowlkesMallows => &[Tp, Fp, Fn],
            PairMetric::Accuracy | PairMetric::Mcc | PairMetric::ReductionRatio => {
                &[Tp, Fp, Fn, Tn]
            }
            PairMetric::Specificity => &[Fp, Tn],
        }
    }

    /// Metrics that read true negatives are dominated by class imbalance.
    pub fn is_unreliable(self) -> bool {
        self.reads().contains(&Cell::Tn)
    }

    /// Value of the metric, `None` when a denominator is zero.
    pub fn evaluate<T: Scalar>(self, m: &ConfusionMatrix) -> Option<T> {
        let c = T::from_count;
        let (tp, fp, fn_, tn) = (c(m.tp), c(m.fp), c(m.fn_), c(m.tn));
        let total = tp + fp + fn_ + tn;
        let ratio = |num: T, den: T| (den > T::zero()).then(|| num / den);
        match self {
            PairMetric::Precision => ratio(tp, tp + fp),
            PairMetric::Recall => ratio(tp, tp + fn_),
            PairMetric::F1 => {
                let p = ratio(tp, tp + fp)?;
                let r = ratio(tp, tp + fn_)?;
                let two = T::one() + T::one();
                ratio(two * p * r, p + r)
            }
            PairMetric::FStar => ratio(tp, tp + fp + fn_),
            PairMetric::Accuracy => ratio(tp + tn, total),
            PairMetric::FowlkesMallows => {
                let p = ratio(tp, tp + fp)?;
                let r = ratio(tp, tp + fn_)?;
                Some((p * r).sqrt())
            }
            PairMetric::Mcc => {
                let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
                if factors.iter().any(|&f| f <= T::zero()) {
                    return None;
                }
                // two partial roots keep the product of four counts from overflowing
                let den = (factors[0] * factors[1]).sqrt() * (factors[2] * factors[3]).sqrt();
                let mcc = (tp * tn - fp * fn_) / den;
                Some(mcc.max(-T::one()).min(T::one()))
            }
            PairMetric::ReductionRatio => ratio(tp + fp, total).map(|x| T::one() - x),
            PairMetric::Specificity => ratio(tn, tn + fp),
        }
    }
}

impl fmt::Display for PairMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '*')
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "precision" => PairMetric::Precision,
            "recall" | "sensitivity" => PairMetric::Recall,
            "f1" | "f1score" => PairMetric::F1,
            "fstar" | "f*" => PairMetric::FStar,
            "accuracy" => PairMetric::Accuracy,
            "fowlkesmallows" | "fm" => PairMetric::FowlkesMallows,
            "mcc" | "matthews" => PairMetric::Mcc,
            "reductionratio" | "rr" => PairMetric::ReductionRatio,
            "specificity" => PairMetric::Specificity,
            _ => return Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        })
    }
}

/// A named metric value; `value` is `None` when undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricValue<T> {
    pub name: String,
    pub value: Option<T>,
    /// Confusion cells the value depends on (empty for cluster metrics).
    #[serde(default)]
    pub defined_on: Vec<Cell>,
    /// Set for metrics that read true negatives.
    #[serde(default)]
    pub unreliable: bool,
}

impl<T: Scalar> MetricValue<T> {
    pub fn of_pair_metric(metric: PairMetric, m: &ConfusionMatrix) -> Self {
        MetricValue {
            name: metric.name().to_owned(),
            value: metric.evaluate(m),
            defined_on: metric.reads().to_vec(),
            unreliable: metric.is_unreliable(),
        }
    }

    pub fn named(name: &str, value: Option<T>) -> Self {
        MetricValue {
            name: name.to_owned(),
            value: value.filter(|v| v.is_finite()),
            defined_on: Vec::new(),
            unreliable: false,
        }
    }
}

/// Every pair metric for `m`.
pub fn pair_metrics<T: Scalar>(m: &ConfusionMatrix) -> Vec<MetricValue<T>> {
    PairMetric::ALL
        .iter()
        .map(|&metric| MetricValue::of_pair_metric(metric, m))
        .collect()
}
