//! Seeded synthetic matching instances for benchmarks and tests.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::pair::{Pair, ScoredPair};
use crate::scalar::pairs_of;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SyntheticSpec {
    pub records: usize,
    /// Requested number of distinct matches; fewer are produced when the
    /// truth does not have enough duplicate pairs.
    pub matches: usize,
    /// Truth cluster sizes are uniform in `1..=max_cluster_size`.
    pub max_cluster_size: usize,
    /// Share of matches that are true duplicates.
    pub precision: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            records: 1000,
            matches: 450,
            max_cluster_size: 4,
            precision: 0.8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticInstance {
    pub truth: Clustering,
    pub matches: Vec<ScoredPair>,
}

/// True matches score in `[0.5, 1)`, false ones in `[0, 0.8)`, so the two
/// populations overlap around the middle.
pub fn generate(spec: &SyntheticSpec) -> SyntheticInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.records;
    let mut labels = Vec::with_capacity(n);
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    while labels.len() < n {
        let size = rng.gen_range(1..=spec.max_cluster_size.max(1)).min(n - labels.len());
        clusters.push((labels.len(), size));
        labels.extend(std::iter::repeat_n(clusters.len() - 1, size));
    }
    let truth = Clustering::from_labels(&labels);
    let multi: Vec<(usize, usize)> = clusters.into_iter().filter(|&(_, s)| s > 1).collect();

    let available = multi.iter().map(|&(_, s)| pairs_of(s)).sum::<u64>() as usize;
    let want_true = ((spec.matches as f64 * spec.precision).round() as usize).min(available);
    let want_false = spec.matches.saturating_sub(want_true);

    let mut seen: HashSet<Pair> = HashSet::with_capacity(spec.matches);
    let mut matches = Vec::with_capacity(spec.matches);
    while seen.len() < want_true {
        let (start, size) = multi[rng.gen_range(0..multi.len())];
        let a = start + rng.gen_range(0..size);
        let b = start + rng.gen_range(0..size);
        if let Some(p) = Pair::new(a, b) {
            if seen.insert(p) {
                matches.push(ScoredPair::new(p, Some(rng.gen_range(0.5..1.0))));
            }
        }
    }
    let max_false = pairs_of(n).saturating_sub(truth.total_pairs()) as usize;
    let target = seen.len() + want_false.min(max_false);
    while seen.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if truth.same_cluster(a, b) {
            continue;
        }
        if let Some(p) = Pair::new(a, b) {
            if seen.insert(p) {
                matches.push(ScoredPair::new(p, Some(rng.gen_range(0.0..0.8))));
            }
        }
    }
    SyntheticInstance { truth, matches }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_requested_shape() {
        let spec = SyntheticSpec {
            records: 500,
            matches: 200,
            ..SyntheticSpec::default()
        };
        let inst = generate(&spec);
        assert_eq!(inst.truth.len(), 500);
        assert_eq!(inst.matches.len(), 200);
        let truly = inst
            .matches
            .iter()
            .filter(|m| inst.truth.same_cluster(m.pair.low(), m.pair.high()))
            .count();
        assert_eq!(truly, 160);
        assert_eq!(generate(&spec), inst);
    }

    #[test]
    fn tiny_instances_do_not_loop() {
        let spec = SyntheticSpec {
            records: 3,
            matches: 100,
            max_cluster_size: 1,
            precision: 0.5,
            seed: 3,
        };
        let inst = generate(&spec);
        assert_eq!(inst.matches.len(), 3);
    }
}
