//! Metric/metric and effort/metric diagrams.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{confusion_sequence_for_plan, Clustering, ConfusionMatrix, SamplePlan};
use crate::error::{Error, Result};
use crate::metrics::PairMetric;
use crate::pair::ScoredPair;

/// One sample of a metric/metric diagram. Undefined metric values are
/// `None` and render as gaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramPoint {
    pub x: Option<f64>,
    pub y: Option<f64>,
    /// Similarity of the last match applied; `None` before any match or
    /// when that match carries no similarity.
    pub threshold: Option<f64>,
    pub matrix: ConfusionMatrix,
}

pub fn metric_metric_diagram(
    matches: &[ScoredPair],
    truth: &Clustering,
    x: PairMetric,
    y: PairMetric,
    samples: usize,
) -> Result<Vec<DiagramPoint>> {
    if !matches.iter().any(|m| m.similarity.is_some()) {
        return Err(Error::NoSimilarities);
    }
    let plan = SamplePlan::new(matches, samples)?;
    let sequence = confusion_sequence_for_plan(truth.len(), &plan, truth)?;
    Ok(sequence
        .into_iter()
        .enumerate()
        .map(|(i, matrix)| DiagramPoint {
            x: x.evaluate(&matrix),
            y: y.evaluate(&matrix),
            threshold: plan.threshold(i),
            matrix,
        })
        .collect())
}

/// Effort and quality of one experiment, as input to the effort diagram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EffortSample {
    pub experiment: String,
    pub series: String,
    pub effort: Option<f64>,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EffortPoint {
    pub experiment: String,
    pub effort: f64,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EffortSeries {
    pub series: String,
    pub points: Vec<EffortPoint>,
}

/// Groups samples into series, each sorted by effort (ties by experiment).
/// With `running_max`, every value becomes the best value so far in its
/// series; undefined values before the first defined one stay undefined.
pub fn effort_metric_diagram(samples: &[EffortSample], running_max: bool) -> Result<Vec<EffortSeries>> {
    let mut grouped: BTreeMap<&str, Vec<EffortPoint>> = BTreeMap::new();
    for s in samples {
        let effort = s.effort.ok_or_else(|| Error::MissingEffort(s.experiment.clone()))?;
        grouped.entry(&s.series).or_default().push(EffortPoint {
            experiment: s.experiment.clone(),
            effort,
            value: s.value,
        });
    }
    Ok(grouped
        .into_iter()
        .map(|(series, mut points)| {
            points.sort_by(|a, b| a.effort.total_cmp(&b.effort).then_with(|| a.experiment.cmp(&b.experiment)));
            if running_max {
                let mut best: Option<f64> = None;
                for p in &mut points {
                    best = match (best, p.value) {
                        (Some(b), Some(v)) => Some(b.max(v)),
                        (b, v) => b.or(v),
                    };
                    p.value = best;
                }
            }
            EffortSeries {
                series: series.to_owned(),
                points,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::Pair;

    #[test]
    fn worked_run_precision_recall() {
        // truth {a,b,c}, {d}; matches by descending similarity: cd, ab, bc
        let truth = Clustering::from_labels(&[0, 0, 0, 1]);
        let m = |a, b, s| ScoredPair::new(Pair::new(a, b).unwrap(), Some(s));
        let matches = vec![m(2, 3, 0.9), m(0, 1, 0.8), m(1, 2, 0.7)];
        let points = metric_metric_diagram(&matches, &truth, PairMetric::Precision, PairMetric::Recall, 4).unwrap();
        let xy: Vec<(Option<f64>, Option<f64>)> = points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(xy[0], (None, Some(0.0)));
        assert_eq!(xy[1], (Some(0.0), Some(0.0)));
        assert_eq!(points[3].y, Some(1.0));
        assert_eq!(points[0].threshold, None);
        assert_eq!(points[1].threshold, Some(0.9));
    }

    #[test]
    fn diagram_needs_similarities() {
        let truth = Clustering::from_labels(&[0, 0]);
        let matches = vec![ScoredPair::new(Pair::new(0, 1).unwrap(), None)];
        assert!(matches!(
            metric_metric_diagram(&matches, &truth, PairMetric::Precision, PairMetric::Recall, 2),
            Err(Error::NoSimilarities)
        ));
    }

    fn sample(e: &str, series: &str, effort: Option<f64>, value: Option<f64>) -> EffortSample {
        EffortSample {
            experiment: e.into(),
            series: series.into(),
            effort,
            value,
        }
    }

    #[test]
    fn running_max_never_decreases() {
        let samples = vec![
            sample("e3", "s", Some(3.0), Some(0.5)),
            sample("e1", "s", Some(1.0), Some(0.7)),
            sample("e2", "s", Some(2.0), None),
            sample("f1", "t", Some(1.0), Some(0.1)),
        ];
        let series = effort_metric_diagram(&samples, true).unwrap();
        assert_eq!(series.len(), 2);
        let values: Vec<Option<f64>> = series[0].points.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![Some(0.7), Some(0.7), Some(0.7)]);
        let raw = effort_metric_diagram(&samples, false).unwrap();
        assert_eq!(raw[0].points[1].value, None);
    }

    #[test]
    fn missing_effort_is_an_error() {
        let samples = vec![sample("e", "s", None, Some(0.5))];
        assert!(matches!(effort_metric_diagram(&samples, false), Err(Error::MissingEffort(_))));
    }
}
