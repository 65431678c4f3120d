//! Cluster-based metrics comparing two partitions of the same records.

use std::collections::{BTreeMap, HashMap};

use crate::clustering::{ClusterId, Clustering};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Overlap sizes between the clusters of `left` and `right`.
struct Contingency {
    left_sizes: HashMap<ClusterId, usize>,
    right_sizes: HashMap<ClusterId, usize>,
    overlap: BTreeMap<(ClusterId, ClusterId), usize>,
    n: usize,
}

impl Contingency {
    fn build(left: &Clustering, right: &Clustering) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::UniverseMismatch {
                left: left.len(),
                right: right.len(),
            });
        }
        let (l, r) = (left.labels(), right.labels());
        let mut c = Contingency {
            left_sizes: HashMap::new(),
            right_sizes: HashMap::new(),
            overlap: BTreeMap::new(),
            n: l.len(),
        };
        for (&a, &b) in l.iter().zip(&r) {
            *c.left_sizes.entry(a).or_default() += 1;
            *c.right_sizes.entry(b).or_default() += 1;
            *c.overlap.entry((a, b)).or_default() += 1;
        }
        Ok(c)
    }
}

fn entropy<T: Scalar>(sizes: impl Iterator<Item = usize>, n: usize) -> T {
    let n = T::from_count(n as u64);
    sizes.fold(T::zero(), |acc, size| {
        let p = T::from_count(size as u64) / n;
        acc - p * p.ln()
    })
}

/// Precision, recall and F1 of the closest-cluster matching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestClusterScore<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

/// Closest-cluster F1 with Jaccard similarity between clusters.
///
/// Precision averages, over experiment clusters, the best Jaccard overlap
/// with any truth cluster; recall does the same from the truth side.
pub fn closest_cluster_f1<T: Scalar>(
    experiment: &Clustering,
    truth: &Clustering,
) -> Result<ClosestClusterScore<T>> {
    if experiment.is_empty() || truth.is_empty() {
        return Err(Error::EmptyClustering);
    }
    let c = Contingency::build(experiment, truth)?;
    let mut best_left: HashMap<ClusterId, T> = HashMap::new();
    let mut best_right: HashMap<ClusterId, T> = HashMap::new();
    for (&(a, b), &shared) in &c.overlap {
        let union = c.left_sizes[&a] + c.right_sizes[&b] - shared;
        let jaccard = T::from_count(shared as u64) / T::from_count(union as u64);
        let l = best_left.entry(a).or_insert_with(T::zero);
        *l = l.max(jaccard);
        let r = best_right.entry(b).or_insert_with(T::zero);
        *r = r.max(jaccard);
    }
    let mean = |m: &HashMap<ClusterId, T>| {
        m.values().fold(T::zero(), |acc, &v| acc + v) / T::from_count(m.len() as u64)
    };
    let precision = mean(&best_left);
    let recall = mean(&best_right);
    let f1 = if precision + recall > T::zero() {
        (T::one() + T::one()) * precision * recall / (precision + recall)
    } else {
        T::zero()
    };
    Ok(ClosestClusterScore {
        precision,
        recall,
        f1,
    })
}

/// Variation of information in nats.
pub fn variation_of_information<T: Scalar>(a: &Clustering, b: &Clustering) -> Result<T> {
    let c = Contingency::build(a, b)?;
    if c.n == 0 {
        return Err(Error::EmptyClustering);
    }
    let h_a: T = entropy(c.left_sizes.values().copied(), c.n);
    let h_b: T = entropy(c.right_sizes.values().copied(), c.n);
    let n = T::from_count(c.n as u64);
    let mutual = c.overlap.iter().fold(T::zero(), |acc, (&(x, y), &shared)| {
        let shared = T::from_count(shared as u64);
        let (sx, sy) = (
            T::from_count(c.left_sizes[&x] as u64),
            T::from_count(c.right_sizes[&y] as u64),
        );
        acc + shared / n * (shared * n / (sx * sy)).ln()
    });
    let two = T::one() + T::one();
    Ok((h_a + h_b - two * mutual).max(T::zero()))
}

/// Generalized merge distance from `source` to `target`.
///
/// Each source cluster is split into its slices (overlaps with target
/// clusters) and the slices are then merged into the target clusters.
/// A split of a block of size `x + y` into `x` and `y` costs
/// `split_cost(x, y)`; merging blocks of sizes `x` and `y` costs
/// `merge_cost(x, y)`. Slices are accumulated in target/source id order.
pub fn generalized_merge_distance<T, M, S>(
    source: &Clustering,
    target: &Clustering,
    merge_cost: M,
    split_cost: S,
) -> Result<T>
where
    T: Scalar,
    M: Fn(usize, usize) -> T,
    S: Fn(usize, usize) -> T,
{
    let c = Contingency::build(source, target)?;
    let mut cost = T::zero();

    // overlap is ordered by (source, target): slices of one source cluster are adjacent
    let mut current = None;
    let mut accumulated = 0;
    for (&(s, _), &slice) in &c.overlap {
        if current != Some(s) {
            current = Some(s);
            accumulated = 0;
        }
        if accumulated > 0 {
            cost = cost + split_cost(slice, accumulated);
        }
        accumulated += slice;
    }

    let mut by_target: BTreeMap<ClusterId, Vec<usize>> = BTreeMap::new();
    for (&(_, t), &slice) in &c.overlap {
        by_target.entry(t).or_default().push(slice);
    }
    for slices in by_target.values() {
        let mut accumulated = 0;
        for &slice in slices {
            if accumulated > 0 {
                cost = cost + merge_cost(slice, accumulated);
            }
            accumulated += slice;
        }
    }
    Ok(cost)
}

/// Fewest merges and splits turning `source` into `target`, each costing 1.
///
/// Join source and target clusters whenever they overlap; a connected
/// group of `r` source and `t` target clusters needs at least `r - 1`
/// merges and `t - 1` splits, and merging the group into one block before
/// splitting it achieves that. The slice path of
/// [`generalized_merge_distance`] can cost more here.
pub fn unit_merge_distance<T: Scalar>(source: &Clustering, target: &Clustering) -> Result<T> {
    let c = Contingency::build(source, target)?;
    let left: HashMap<ClusterId, usize> = c.left_sizes.keys().enumerate().map(|(i, &id)| (id, i)).collect();
    let right: HashMap<ClusterId, usize> = c
        .right_sizes
        .keys()
        .enumerate()
        .map(|(i, &id)| (id, left.len() + i))
        .collect();
    let mut groups = Clustering::singletons(left.len() + right.len());
    for &(s, t) in c.overlap.keys() {
        groups.union(left[&s], right[&t]);
    }
    let operations = left.len() + right.len() - 2 * groups.cluster_count();
    Ok(T::from_count(operations as u64))
}
