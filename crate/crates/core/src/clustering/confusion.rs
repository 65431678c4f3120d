//! Confusion matrices over record pairs, and their sequence across similarity thresholds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::intersection::DynamicIntersection;
use super::union_find::{ClusterId, Clustering};
use crate::error::{Error, Result};
use crate::pair::{by_descending_similarity, Pair, ScoredPair};
use crate::scalar::pairs_of;

/// Pair counts comparing an experiment against a gold standard.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub const fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `(tp, fp, fn, tn)`
    pub fn as_tuple(&self) -> (u64, u64, u64, u64) {
        (self.tp, self.fp, self.fn_, self.tn)
    }
}

/// Builds the matrix from the number of experiment pairs, true positive
/// pairs, truth pairs and all pairs.
pub fn confusion_from_counts(
    experiment_pairs: u64,
    true_positive_pairs: u64,
    truth_pairs: u64,
    total_pairs: u64,
) -> Result<ConfusionMatrix> {
    let inconsistent = || {
        Error::CountInconsistency(format!(
            "experiment={experiment_pairs} tp={true_positive_pairs} truth={truth_pairs} total={total_pairs}"
        ))
    };
    let tp = true_positive_pairs;
    let fp = experiment_pairs.checked_sub(tp).ok_or_else(inconsistent)?;
    let fn_ = truth_pairs.checked_sub(tp).ok_or_else(inconsistent)?;
    let tn = total_pairs
        .checked_sub(tp)
        .and_then(|x| x.checked_sub(fp))
        .and_then(|x| x.checked_sub(fn_))
        .ok_or_else(inconsistent)?;
    Ok(ConfusionMatrix { tp, fp, fn_, tn })
}

/// Matches in application order together with the batch boundaries.
///
/// `cuts[i]` is the number of matches applied for entry `i`; `cuts[0] == 0`
/// and the last cut consumes every match. When the match count does not
/// divide evenly the remainder goes one each to the earliest batches.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    pub ordered: Vec<ScoredPair>,
    pub cuts: Vec<usize>,
}

impl SamplePlan {
    pub fn new(matches: &[ScoredPair], samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidSampleCount(samples));
        }
        let mut ordered = matches.to_vec();
        ordered.sort_by(by_descending_similarity);
        let batches = samples - 1;
        let (base, extra) = (ordered.len() / batches, ordered.len() % batches);
        let mut cuts = Vec::with_capacity(samples);
        cuts.push(0);
        let mut applied = 0;
        for i in 0..batches {
            applied += base + usize::from(i < extra);
            cuts.push(applied);
        }
        Ok(SamplePlan { ordered, cuts })
    }

    /// Matches applied between entry `i - 1` and entry `i`.
    pub fn batch(&self, i: usize) -> &[ScoredPair] {
        &self.ordered[self.cuts[i - 1]..self.cuts[i]]
    }

    /// Similarity threshold that reproduces entry `i`: the score of the last
    /// applied match. `None` stands for an infinite threshold (nothing
    /// applied yet, or only unscored matches applied).
    pub fn threshold(&self, i: usize) -> Option<f64> {
        match self.cuts[i] {
            0 => None,
            k => self.ordered[k - 1].similarity,
        }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

fn check_records(record_count: usize, matches: &[ScoredPair], truth: &Clustering) -> Result<()> {
    if truth.len() != record_count {
        return Err(Error::UniverseMismatch {
            left: record_count,
            right: truth.len(),
        });
    }
    if let Some(bad) = matches.iter().find(|m| m.pair.high() >= record_count) {
        return Err(Error::UnknownRecordId(bad.pair.high().to_string()));
    }
    Ok(())
}

/// Confusion matrices after applying `0, …, |matches|` matches in `samples`
/// evenly spaced steps, reusing the experiment clustering and the dynamic
/// intersection between steps.
pub fn confusion_matrix_sequence(
    record_count: usize,
    matches: &[ScoredPair],
    truth: &Clustering,
    samples: usize,
) -> Result<Vec<ConfusionMatrix>> {
    let plan = SamplePlan::new(matches, samples)?;
    confusion_sequence_for_plan(record_count, &plan, truth)
}

pub fn confusion_sequence_for_plan(
    record_count: usize,
    plan: &SamplePlan,
    truth: &Clustering,
) -> Result<Vec<ConfusionMatrix>> {
    check_records(record_count, &plan.ordered, truth)?;
    let total = pairs_of(record_count);
    let truth_pairs = truth.total_pairs();
    let mut experiment = Clustering::singletons(record_count);
    let mut intersection = DynamicIntersection::new(truth);

    let mut matrices = Vec::with_capacity(plan.len());
    matrices.push(confusion_from_counts(0, 0, truth_pairs, total)?);
    for i in 1..plan.len() {
        let batch = plan.batch(i).iter().map(|m| m.pair.records());
        let merges = experiment.tracked_union(batch);
        intersection.update(&merges);
        matrices.push(confusion_from_counts(
            experiment.total_pairs(),
            intersection.true_positive_pairs(),
            truth_pairs,
            total,
        )?);
    }
    Ok(matrices)
}

/// Reference implementation: rebuilds the experiment clustering and the
/// intersection from scratch for every sample.
pub fn naive_confusion_sequence(
    record_count: usize,
    matches: &[ScoredPair],
    truth: &Clustering,
    samples: usize,
) -> Result<Vec<ConfusionMatrix>> {
    let plan = SamplePlan::new(matches, samples)?;
    check_records(record_count, &plan.ordered, truth)?;
    let truth_labels = truth.labels();
    plan.cuts
        .iter()
        .map(|&applied| {
            let experiment =
                Clustering::from_pairs(record_count, plan.ordered[..applied].iter().map(|m| m.pair));
            confusion_of(&experiment, truth, &truth_labels)
        })
        .collect()
}

/// Matrix of a (closed) experiment clustering against the truth.
pub fn confusion_between(experiment: &Clustering, truth: &Clustering) -> Result<ConfusionMatrix> {
    if experiment.len() != truth.len() {
        return Err(Error::UniverseMismatch {
            left: experiment.len(),
            right: truth.len(),
        });
    }
    confusion_of(experiment, truth, &truth.labels())
}

fn confusion_of(
    experiment: &Clustering,
    truth: &Clustering,
    truth_labels: &[ClusterId],
) -> Result<ConfusionMatrix> {
    let mut overlap: HashMap<(ClusterId, ClusterId), usize> = HashMap::new();
    for (record, &t) in truth_labels.iter().enumerate() {
        *overlap.entry((experiment.cluster_of(record), t)).or_default() += 1;
    }
    let tp = overlap.values().map(|&c| pairs_of(c)).sum();
    confusion_from_counts(
        experiment.total_pairs(),
        tp,
        truth.total_pairs(),
        pairs_of(truth_labels.len()),
    )
}

/// Pairs that must be added to the original matches to make them
/// transitively closed.
pub fn closure_deficiency(record_count: usize, original_matches: &[Pair]) -> u64 {
    let mut distinct = original_matches.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let closure = Clustering::from_pairs(record_count, distinct.iter().copied());
    closure.total_pairs() - distinct.len() as u64
}
