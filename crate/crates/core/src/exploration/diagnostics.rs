//! Attribute diagnostics: how often pairs with null or equal values in an
//! attribute are misclassified.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::pair::Pair;

/// Pairs over which the diagnostics are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PairUniverse {
    /// Pairs matched by the experiment or the gold standard.
    #[default]
    ExperimentAndGold,
    /// Every pair of records; quadratic in the dataset size.
    AllPairs,
}

/// Largest dataset accepted for [`PairUniverse::AllPairs`].
pub const ALL_PAIRS_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeRatio {
    pub attribute: String,
    /// Pairs with the property in this attribute.
    pub count: u64,
    /// Those of them the experiment misclassifies.
    pub false_count: u64,
    /// `false_count / count`; undefined when `count` is 0.
    pub ratio: Option<f64>,
}

fn universe(experiment: &Clustering, truth: &Clustering, which: PairUniverse) -> Result<Vec<Pair>> {
    if experiment.len() != truth.len() {
        return Err(Error::UniverseMismatch {
            left: experiment.len(),
            right: truth.len(),
        });
    }
    match which {
        PairUniverse::ExperimentAndGold => {
            let set: BTreeSet<Pair> = experiment
                .closure_pairs()
                .into_iter()
                .chain(truth.closure_pairs())
                .collect();
            Ok(set.into_iter().collect())
        }
        PairUniverse::AllPairs => {
            let n = experiment.len();
            if n > ALL_PAIRS_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "the all-pairs universe is limited to {ALL_PAIRS_LIMIT} records, dataset has {n}"
                )));
            }
            Ok((0..n)
                .flat_map(|a| (a + 1..n).map(move |b| Pair::new(a, b).expect("a < b")))
                .collect())
        }
    }
}

fn ratios(
    dataset: &Dataset,
    experiment: &Clustering,
    truth: &Clustering,
    which: PairUniverse,
    has_property: impl Fn(Option<&str>, Option<&str>) -> bool,
) -> Result<Vec<AttributeRatio>> {
    if dataset.len() != truth.len() {
        return Err(Error::UniverseMismatch {
            left: dataset.len(),
            right: truth.len(),
        });
    }
    let pairs = universe(experiment, truth, which)?;
    let width = dataset.attribute_names().len();
    let mut count = vec![0u64; width];
    let mut wrong = vec![0u64; width];
    for pair in pairs {
        let (x, y) = pair.records();
        let misclassified = experiment.same_cluster(x, y) != truth.same_cluster(x, y);
        for a in 0..width {
            if has_property(dataset.value(x, a), dataset.value(y, a)) {
                count[a] += 1;
                wrong[a] += u64::from(misclassified);
            }
        }
    }
    Ok(dataset
        .attribute_names()
        .iter()
        .enumerate()
        .map(|(a, name)| AttributeRatio {
            attribute: name.clone(),
            count: count[a],
            false_count: wrong[a],
            ratio: (count[a] > 0).then(|| wrong[a] as f64 / count[a] as f64),
        })
        .collect())
}

/// Per attribute, the share of misclassified pairs among pairs where at
/// least one record is null in that attribute.
pub fn null_ratio(
    dataset: &Dataset,
    experiment: &Clustering,
    truth: &Clustering,
    which: PairUniverse,
) -> Result<Vec<AttributeRatio>> {
    ratios(dataset, experiment, truth, which, |u, v| u.is_none() || v.is_none())
}

/// Per attribute, the share of misclassified pairs among pairs whose two
/// values are non-null and identical.
pub fn equal_ratio(
    dataset: &Dataset,
    experiment: &Clustering,
    truth: &Clustering,
    which: PairUniverse,
) -> Result<Vec<AttributeRatio>> {
    ratios(dataset, experiment, truth, which, |u, v| matches!((u, v), (Some(u), Some(v)) if u == v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset() -> Dataset {
        Dataset::from_rows(
            "d",
            &["name", "city"],
            &[
                ("a", vec![Some("x"), None]),
                ("b", vec![Some("x"), Some("berlin")]),
                ("c", vec![Some("y"), Some("berlin")]),
                ("d", vec![Some("z"), None]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn never_null_attribute_is_undefined() {
        let d = dataset();
        let e = Clustering::from_labels(&[0, 0, 1, 2]);
        let g = Clustering::from_labels(&[0, 0, 1, 1]);
        let r = null_ratio(&d, &e, &g, PairUniverse::AllPairs).unwrap();
        assert_eq!(r[0].ratio, None);
        assert_eq!(r[0].count, 0);
    }

    #[test]
    fn counts_over_all_pairs_match_enumeration() {
        let d = dataset();
        let e = Clustering::from_labels(&[0, 0, 1, 2]);
        let g = Clustering::from_labels(&[0, 0, 1, 1]);
        // city null pairs: ab ac ad bd cd; misclassified overall: cd only
        let nulls = null_ratio(&d, &e, &g, PairUniverse::AllPairs).unwrap();
        assert_eq!((nulls[1].count, nulls[1].false_count), (5, 1));
        assert_eq!(nulls[1].ratio, Some(0.2));
        // equal: name ab, city bc
        let eq = equal_ratio(&d, &e, &g, PairUniverse::AllPairs).unwrap();
        assert_eq!((eq[0].count, eq[0].false_count), (1, 0));
        assert_eq!((eq[1].count, eq[1].false_count), (1, 0));
    }

    #[test]
    fn default_universe_only_sees_matched_pairs() {
        let d = dataset();
        let e = Clustering::from_labels(&[0, 0, 1, 2]);
        let g = Clustering::from_labels(&[0, 0, 1, 1]);
        // universe {ab, cd}
        let nulls = null_ratio(&d, &e, &g, PairUniverse::ExperimentAndGold).unwrap();
        assert_eq!((nulls[1].count, nulls[1].false_count), (2, 1));
    }

    #[test]
    fn perfect_experiment_scores_zero() {
        let d = dataset();
        let g = Clustering::from_labels(&[0, 0, 1, 1]);
        let eq = equal_ratio(&d, &g, &g, PairUniverse::AllPairs).unwrap();
        assert!(eq.iter().all(|r| r.ratio.unwrap_or(0.0) == 0.0));
    }
}
