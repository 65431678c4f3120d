//! Dataset profiling and benchmark-dataset ranking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{pairs_of, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetProfile<T> {
    /// Null attribute values over all attribute values.
    pub sparsity: T,
    /// Mean number of whitespace-separated words per non-null value.
    pub textuality: T,
    pub tuple_count: usize,
    /// True duplicate pairs over all pairs; only known with a gold standard.
    pub positive_ratio: Option<T>,
    pub vocabulary: BTreeSet<String>,
}

pub fn profile_dataset<T: Scalar>(dataset: &Dataset, truth: Option<&Clustering>) -> Result<DatasetProfile<T>> {
    let mut nulls = 0u64;
    let mut filled = 0u64;
    let mut words = 0u64;
    let mut vocabulary = BTreeSet::new();
    for (_, values) in dataset.rows() {
        for value in values {
            match value {
                None => nulls += 1,
                Some(v) => {
                    filled += 1;
                    for token in v.split_whitespace() {
                        words += 1;
                        vocabulary.insert(token.to_owned());
                    }
                }
            }
        }
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            T::zero()
        } else {
            T::from_count(num) / T::from_count(den)
        }
    };
    let positive_ratio = match truth {
        None => None,
        Some(t) if t.len() != dataset.len() => {
            return Err(Error::UniverseMismatch {
                left: dataset.len(),
                right: t.len(),
            })
        }
        Some(t) => Some(ratio(t.total_pairs(), pairs_of(dataset.len()))),
    };
    Ok(DatasetProfile {
        sparsity: ratio(nulls, nulls + filled),
        textuality: ratio(words, filled),
        tuple_count: dataset.len(),
        positive_ratio,
        vocabulary,
    })
}

/// Jaccard coefficient of two vocabularies; 0 when both are empty.
pub fn vocabulary_similarity<T: Scalar>(a: &BTreeSet<String>, b: &BTreeSet<String>) -> T {
    let union = a.union(b).count();
    if union == 0 {
        return T::zero();
    }
    T::from_count(a.intersection(b).count() as u64) / T::from_count(union as u64)
}

/// Weight of each profile dimension in the ranking distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ProfileWeights<T> {
    pub sparsity: T,
    pub textuality: T,
    pub tuple_count: T,
    pub positive_ratio: T,
    pub vocabulary: T,
}

impl<T: Scalar> Default for ProfileWeights<T> {
    fn default() -> Self {
        ProfileWeights {
            sparsity: T::one(),
            textuality: T::one(),
            tuple_count: T::one(),
            positive_ratio: T::one(),
            vocabulary: T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RankedDataset<T> {
    pub name: String,
    pub distance: T,
    pub vocabulary_similarity: T,
}

/// Ranks `candidates` by weighted distance to `target`, closest first.
///
/// Sparsity and positive ratio are compared directly. Textuality and tuple
/// count are divided by their largest value among all profiles so that
/// every dimension lies in `[0, 1]`. The vocabulary term is one minus the
/// vocabulary similarity. Positive ratio only counts when both profiles
/// have one. Equal distances are ordered by name.
pub fn rank_benchmark_datasets<T: Scalar>(
    candidates: &[(String, DatasetProfile<T>)],
    target: &DatasetProfile<T>,
    weights: &ProfileWeights<T>,
) -> Result<Vec<RankedDataset<T>>> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let all = || candidates.iter().map(|(_, p)| p).chain(std::iter::once(target));
    let max_text = all().map(|p| p.textuality).fold(T::zero(), T::max);
    let max_tuples = T::from_count(all().map(|p| p.tuple_count).max().unwrap_or(0) as u64);
    let scaled = |v: T, max: T| if max > T::zero() { v / max } else { T::zero() };

    let mut ranked: Vec<RankedDataset<T>> = candidates
        .iter()
        .map(|(name, p)| {
            let vocab = vocabulary_similarity::<T>(&p.vocabulary, &target.vocabulary);
            let mut distance = weights.sparsity * (p.sparsity - target.sparsity).abs()
                + weights.textuality * (scaled(p.textuality, max_text) - scaled(target.textuality, max_text)).abs()
                + weights.tuple_count
                    * (scaled(T::from_count(p.tuple_count as u64), max_tuples)
                        - scaled(T::from_count(target.tuple_count as u64), max_tuples))
                    .abs()
                + weights.vocabulary * (T::one() - vocab);
            if let (Some(a), Some(b)) = (p.positive_ratio, target.positive_ratio) {
                distance = distance + weights.positive_ratio * (a - b).abs();
            }
            RankedDataset {
                name: name.clone(),
                distance,
                vocabulary_similarity: vocab,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(ranked)
}
