//! Incrementally maintained meet of an experiment clustering and a truth clustering.

use std::collections::BTreeMap;

use super::union_find::{ClusterId, Clustering, MergeRecord};
use crate::pair::RecordId;

/// Common refinement of an evolving experiment clustering and a fixed truth
/// clustering.
///
/// Every intersection cluster is keyed by the experiment cluster and truth
/// cluster it is the overlap of. `cells[e]` holds, for experiment cluster
/// `e`, one `(truth cluster, representative record)` entry per truth cluster
/// it touches; the representative locates the intersection cluster inside
/// the pair-counting union-find.
#[derive(Clone, Debug)]
pub struct DynamicIntersection {
    clusters: Clustering,
    cells: Vec<Vec<(ClusterId, RecordId)>>,
}

impl DynamicIntersection {
    /// Starting state for an all-singleton experiment clustering over
    /// `truth.len()` records.
    pub fn new(truth: &Clustering) -> Self {
        Self::from_truth_labels(&truth.labels())
    }

    pub fn from_truth_labels(truth_labels: &[ClusterId]) -> Self {
        let n = truth_labels.len();
        let cells = truth_labels
            .iter()
            .enumerate()
            .map(|(record, &truth)| vec![(truth, record)])
            .collect();
        DynamicIntersection {
            clusters: Clustering::singletons(n),
            cells,
        }
    }

    /// Applies the merges reported by `tracked_union` on the experiment side.
    pub fn update(&mut self, merges: &[MergeRecord]) {
        let mut involved: Vec<(ClusterId, RecordId)> = Vec::new();
        for merge in merges {
            involved.clear();
            for &source in &merge.sources {
                if let Some(cell) = self.cells.get_mut(source) {
                    involved.append(cell);
                }
            }
            involved.sort_unstable_by_key(|&(truth, _)| truth);

            let mut merged = Vec::new();
            for group in involved.chunk_by(|x, y| x.0 == y.0) {
                let (truth, first) = group[0];
                for &(_, other) in &group[1..] {
                    self.clusters.union(first, other);
                }
                merged.push((truth, first));
            }
            if self.cells.len() <= merge.target {
                self.cells.resize_with(merge.target + 1, Vec::new);
            }
            self.cells[merge.target] = merged;
        }
    }

    /// Pairs inside intersection clusters, i.e. true positive pairs.
    pub fn true_positive_pairs(&self) -> u64 {
        self.clusters.total_pairs()
    }

    /// Intersection cluster of every record, as a clustering.
    pub fn clustering(&self) -> &Clustering {
        &self.clusters
    }

    /// Truth cluster → member records of the intersection cells under
    /// experiment cluster `experiment_cluster`.
    pub fn cells_of(&self, experiment_cluster: ClusterId) -> BTreeMap<ClusterId, Vec<RecordId>> {
        let Some(cell) = self.cells.get(experiment_cluster) else {
            return BTreeMap::new();
        };
        cell.iter()
            .map(|&(truth, rep)| {
                let root = self.clusters.root(rep);
                let members = (0..self.clusters.len())
                    .filter(|&r| self.clusters.root(r) == root)
                    .collect();
                (truth, members)
            })
            .collect()
    }

    /// Experiment cluster ids that currently own cells.
    pub fn experiment_clusters(&self) -> Vec<ClusterId> {
        (0..self.cells.len())
            .filter(|&e| !self.cells[e].is_empty())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> (Clustering, DynamicIntersection) {
        let truth = Clustering::from_labels(&["g0", "g0", "g1", "g1"]);
        let di = DynamicIntersection::new(&truth);
        (Clustering::singletons(4), di)
    }

    #[test]
    fn initial_state_maps_each_record_to_its_truth_cluster() {
        let (_, di) = worked_example();
        assert_eq!(di.experiment_clusters(), vec![0, 1, 2, 3]);
        assert_eq!(di.cells_of(0), BTreeMap::from([(0, vec![0])]));
        assert_eq!(di.cells_of(2), BTreeMap::from([(1, vec![2])]));
        assert_eq!(di.true_positive_pairs(), 0);
        assert!(DynamicIntersection::new(&Clustering::singletons(0))
            .experiment_clusters()
            .is_empty());
    }

    #[test]
    fn reproduces_every_step_of_worked_example() {
        let (mut exp, mut di) = worked_example();
        // step 1: {a, c}
        let m = exp.tracked_union([(0, 2)]);
        di.update(&m);
        assert_eq!(di.experiment_clusters(), vec![1, 3, 4]);
        assert_eq!(
            di.cells_of(4),
            BTreeMap::from([(0, vec![0]), (1, vec![2])])
        );
        assert_eq!(di.true_positive_pairs(), 0);
        // step 2: {b, d}
        let m = exp.tracked_union([(1, 3)]);
        assert_eq!(m, vec![MergeRecord { sources: vec![1, 3], target: 5 }]);
        di.update(&m);
        assert_eq!(di.experiment_clusters(), vec![4, 5]);
        assert_eq!(
            di.cells_of(5),
            BTreeMap::from([(0, vec![1]), (1, vec![3])])
        );
        // step 3: {a, b}
        let m = exp.tracked_union([(0, 1)]);
        assert_eq!(m, vec![MergeRecord { sources: vec![4, 5], target: 6 }]);
        di.update(&m);
        assert_eq!(di.experiment_clusters(), vec![6]);
        assert_eq!(
            di.cells_of(6),
            BTreeMap::from([(0, vec![0, 1]), (1, vec![2, 3])])
        );
        assert_eq!(di.true_positive_pairs(), 2);
    }

    #[test]
    fn disjoint_truth_clusters_cause_no_intersection_union() {
        let truth = Clustering::from_labels(&[0, 1, 2]);
        let mut exp = Clustering::singletons(3);
        let mut di = DynamicIntersection::new(&truth);
        di.update(&exp.tracked_union([(0, 1), (1, 2)]));
        assert_eq!(di.true_positive_pairs(), 0);
        assert_eq!(di.clustering().cluster_count(), 3);
    }

    #[test]
    fn shared_truth_cluster_causes_exactly_one_union() {
        let truth = Clustering::from_labels(&[0, 0, 1]);
        let mut exp = Clustering::singletons(3);
        let mut di = DynamicIntersection::new(&truth);
        di.update(&exp.tracked_union([(0, 2)]));
        di.update(&exp.tracked_union([(1, 2)]));
        assert_eq!(di.clustering().cluster_count(), 2);
        assert_eq!(di.true_positive_pairs(), 1);
    }
}
