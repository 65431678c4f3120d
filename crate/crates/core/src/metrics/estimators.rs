//! Quality estimators that need no gold standard.

use std::collections::HashMap;

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::pair::Pair;

pub use crate::clustering::closure_deficiency;

/// For every experiment, the number of pairs on which it disagrees with the
/// majority of all experiments.
///
/// Only pairs matched (after closure) by at least one experiment are voted
/// on. A tie, possible with an even number of experiments, counts as a
/// deviation for nobody.
pub fn majority_vote_deviation(experiments: &[Clustering]) -> Result<Vec<u64>> {
    let k = experiments.len();
    if k < 3 {
        return Err(Error::FewerThanThreeExperiments(k));
    }
    let n = experiments[0].len();
    if let Some(other) = experiments.iter().find(|e| e.len() != n) {
        return Err(Error::UniverseMismatch {
            left: n,
            right: other.len(),
        });
    }

    let mut votes: HashMap<Pair, usize> = HashMap::new();
    for experiment in experiments {
        for pair in experiment.closure_pairs() {
            *votes.entry(pair).or_default() += 1;
        }
    }

    let mut deviations = vec![0u64; k];
    for (&pair, &yes) in &votes {
        let majority_match = 2 * yes > k;
        let majority_non_match = 2 * yes < k;
        if !majority_match && !majority_non_match {
            continue;
        }
        for (i, experiment) in experiments.iter().enumerate() {
            let matched = experiment.same_cluster(pair.low(), pair.high());
            if matched != majority_match {
                deviations[i] += 1;
            }
        }
    }
    Ok(deviations)
}
