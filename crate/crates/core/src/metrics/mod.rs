//! Pair-based and cluster-based quality metrics, ground-truth-free
//! estimators and dataset profiling.

mod cluster;
mod estimators;
mod pair;
mod profile;

pub use cluster::{
    closest_cluster_f1, generalized_merge_distance, unit_merge_distance, variation_of_information,
    ClosestClusterScore,
};
pub use estimators::{closure_deficiency, majority_vote_deviation};
pub use pair::{pair_metrics, Cell, MetricValue, PairMetric};
pub use profile::{
    profile_dataset, rank_benchmark_datasets, vocabulary_similarity, DatasetProfile, ProfileWeights,
    RankedDataset,
};
