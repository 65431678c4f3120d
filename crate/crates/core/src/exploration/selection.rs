//! Pair selection strategies: pairs near the threshold, outliers and
//! per-partition representatives.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sets::Classification;
use crate::clustering::{Clustering, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::pair::{Pair, ScoredPair};

/// Matches that carry a similarity, as `(pair, similarity)`.
fn scored(matches: &[ScoredPair]) -> Result<Vec<(Pair, f64)>> {
    let v: Vec<(Pair, f64)> = matches
        .iter()
        .filter_map(|m| m.similarity.map(|s| (m.pair, s)))
        .collect();
    if v.is_empty() {
        return Err(Error::NoSimilarities);
    }
    Ok(v)
}

fn by_distance(threshold: f64) -> impl Fn(&(Pair, f64), &(Pair, f64)) -> Ordering {
    move |a, b| {
        (a.1 - threshold)
            .abs()
            .total_cmp(&(b.1 - threshold).abs())
            .then_with(|| a.0.cmp(&b.0))
    }
}

fn to_scored(v: Vec<(Pair, f64)>) -> Vec<ScoredPair> {
    v.into_iter().map(|(p, s)| ScoredPair::new(p, Some(s))).collect()
}

/// The `k` scored matches nearest to `threshold`, ordered by distance.
///
/// `proportion` is the share of `k` taken from pairs at or above the
/// threshold (default one half, rounding the odd pair upwards). When one
/// side runs out, the rest comes from the other side.
pub fn select_around_threshold(
    matches: &[ScoredPair],
    threshold: f64,
    k: usize,
    proportion: Option<f64>,
) -> Result<Vec<ScoredPair>> {
    let all = scored(matches)?;
    let proportion = proportion.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::InvalidArgument(format!("proportion must lie in [0, 1], got {proportion}")));
    }
    let order = by_distance(threshold);
    let (mut above, mut below): (Vec<_>, Vec<_>) = all.into_iter().partition(|&(_, s)| s >= threshold);
    above.sort_by(&order);
    below.sort_by(&order);

    let k = k.min(above.len() + below.len());
    let want_above = (k as f64 * proportion).round() as usize;
    let take_above = want_above.min(above.len()).max(k.saturating_sub(below.len()));
    let take_below = k - take_above;
    let mut chosen: Vec<(Pair, f64)> = above[..take_above].iter().chain(&below[..take_below]).copied().collect();
    chosen.sort_by(&order);
    Ok(to_scored(chosen))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OutlierSide {
    FalsePositives,
    FalseNegatives,
    #[default]
    Both,
}

/// Up to `k` misclassified scored matches, furthest from `threshold` first.
///
/// A scored match counts as predicted when its similarity reaches the
/// threshold; gold pairs the experiment never scored have no distance and
/// are not considered.
pub fn select_outliers(
    matches: &[ScoredPair],
    truth: &Clustering,
    threshold: f64,
    k: usize,
    side: OutlierSide,
) -> Result<Vec<(ScoredPair, Classification)>> {
    let mut wrong: Vec<((Pair, f64), Classification)> = scored(matches)?
        .into_iter()
        .map(|(p, s)| {
            let class = Classification::of(s >= threshold, truth.same_cluster(p.low(), p.high()));
            ((p, s), class)
        })
        .filter(|(_, c)| match side {
            OutlierSide::FalsePositives => *c == Classification::FP,
            OutlierSide::FalseNegatives => *c == Classification::FN,
            OutlierSide::Both => !c.is_correct(),
        })
        .collect();
    let distance = |s: f64| (s - threshold).abs();
    wrong.sort_by(|a, b| {
        distance(b.0 .1)
            .total_cmp(&distance(a.0 .1))
            .then_with(|| a.0 .0.cmp(&b.0 .0))
    });
    wrong.truncate(k);
    Ok(wrong
        .into_iter()
        .map(|((p, s), c)| (ScoredPair::new(p, Some(s)), c))
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Sampler {
    #[default]
    Random,
    ClassBased,
    Quantile,
}

/// One partition of the similarity-sorted matches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionSummary {
    /// `[lowest, highest]` similarity inside the partition.
    pub range: [f64; 2],
    pub size: usize,
    /// Counts of the partition's pairs against the gold standard, a pair
    /// being predicted when its similarity reaches the threshold.
    pub matrix: Option<ConfusionMatrix>,
    pub representatives: Vec<ScoredPair>,
}

/// Splits `total` into shares proportional to `weights`, summing to `total`
/// (largest remainder, earlier share first on ties).
pub fn largest_remainder(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut shares: Vec<usize> = weights.iter().map(|&w| total * w / sum).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(total * weights[i] % sum), i));
    let missing = total - shares.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        shares[i] += 1;
    }
    shares
}

/// `b` evenly spaced positions in `0..n`; the median position when `b` is 1.
fn quantile_positions(n: usize, b: usize) -> Vec<usize> {
    if b >= n {
        return (0..n).collect();
    }
    if b == 1 {
        return vec![(n - 1) / 2];
    }
    (0..b).map(|i| (2 * i * (n - 1) + (b - 1)) / (2 * (b - 1))).collect()
}

fn random_positions(rng: &mut ChaCha8Rng, n: usize, b: usize) -> Vec<usize> {
    let mut v = sample(rng, n, b.min(n)).into_vec();
    v.sort_unstable();
    v
}

/// Sorts scored matches by descending similarity, cuts them into `partitions`
/// equal parts (remainder to the earliest) and draws up to `per_partition`
/// representatives from each.
///
/// Class-based sampling needs `truth`: a partition with `kT` correctly and
/// `kF` incorrectly classified pairs contributes `b·kT/(kT+kF)` correct
/// pairs (largest remainder rounding) and the rest incorrect ones, each
/// drawn at random. Quantile sampling takes evenly spaced order statistics.
pub fn select_representatives(
    matches: &[ScoredPair],
    truth: Option<&Clustering>,
    threshold: f64,
    partitions: usize,
    per_partition: usize,
    sampler: Sampler,
    seed: u64,
) -> Result<Vec<PartitionSummary>> {
    if partitions == 0 || per_partition == 0 {
        return Err(Error::InvalidArgument(
            "partition count and per-partition size must be at least 1".into(),
        ));
    }
    if sampler == Sampler::ClassBased && truth.is_none() {
        return Err(Error::NoGold);
    }
    let mut all = scored(matches)?;
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = partitions.min(all.len());
    let (base, extra) = (all.len() / parts, all.len() % parts);
    let mut start = 0;
    let mut out = Vec::with_capacity(parts);
    for i in 0..parts {
        let part = &all[start..start + base + usize::from(i < extra)];
        start += part.len();
        let classes: Option<Vec<Classification>> = truth.map(|t| {
            part.iter()
                .map(|&(p, s)| Classification::of(s >= threshold, t.same_cluster(p.low(), p.high())))
                .collect()
        });
        let positions = match sampler {
            Sampler::Random => random_positions(&mut rng, part.len(), per_partition),
            Sampler::Quantile => quantile_positions(part.len(), per_partition),
            Sampler::ClassBased => {
                let classes = classes.as_ref().expect("truth checked above");
                let (correct, wrong): (Vec<usize>, Vec<usize>) =
                    (0..part.len()).partition(|&j| classes[j].is_correct());
                let b = per_partition.min(part.len());
                let shares = largest_remainder(b, &[correct.len(), wrong.len()]);
                let mut picked: Vec<usize> = random_positions(&mut rng, correct.len(), shares[0])
                    .into_iter()
                    .map(|j| correct[j])
                    .chain(random_positions(&mut rng, wrong.len(), shares[1]).into_iter().map(|j| wrong[j]))
                    .collect();
                picked.sort_unstable();
                picked
            }
        };
        let matrix = classes.map(|cs| {
            let count = |c| cs.iter().filter(|&&x| x == c).count() as u64;
            ConfusionMatrix::new(
                count(Classification::TP),
                count(Classification::FP),
                count(Classification::FN),
                count(Classification::TN),
            )
        });
        out.push(PartitionSummary {
            range: [part[part.len() - 1].1, part[0].1],
            size: part.len(),
            matrix,
            representatives: positions.into_iter().map(|j| ScoredPair::new(part[j].0, Some(part[j].1))).collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored_pairs(sims: &[f64]) -> Vec<ScoredPair> {
        sims.iter()
            .enumerate()
            .map(|(i, &s)| ScoredPair::new(Pair::new(i, i + 1).unwrap(), Some(s)))
            .collect()
    }

    fn sims(v: &[ScoredPair]) -> Vec<f64> {
        v.iter().map(|p| p.similarity.unwrap()).collect()
    }

    #[test]
    fn nearest_on_both_sides() {
        let m = scored_pairs(&[0.1, 0.4, 0.6, 0.9]);
        let picked = select_around_threshold(&m, 0.5, 2, None).unwrap();
        let mut got = sims(&picked);
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.4, 0.6]);
        assert!(select_around_threshold(&m, 0.5, 0, None).unwrap().is_empty());
        assert_eq!(select_around_threshold(&m, 0.5, 10, None).unwrap().len(), 4);
    }

    #[test]
    fn one_sided_shortage_is_filled_from_the_other_side() {
        let m = scored_pairs(&[0.55, 0.6, 0.7, 0.1]);
        let picked = select_around_threshold(&m, 0.5, 4, Some(0.0)).unwrap();
        assert_eq!(picked.len(), 4);
        let picked = select_around_threshold(&m, 0.5, 2, Some(0.0)).unwrap();
        assert_eq!(sims(&picked), vec![0.55, 0.1]);
    }

    #[test]
    fn without_similarities_selection_fails() {
        let m = vec![ScoredPair::new(Pair::new(0, 1).unwrap(), None)];
        assert!(matches!(select_around_threshold(&m, 0.5, 1, None), Err(Error::NoSimilarities)));
    }

    #[test]
    fn outliers_furthest_first() {
        // pairs (0,1) (1,2) (2,3) (3,4); truth only joins 1 and 2
        let m = scored_pairs(&[0.99, 0.3, 0.6, 0.51]);
        let truth = Clustering::from_labels(&[0, 1, 1, 2, 3]);
        let out = select_outliers(&m, &truth, 0.5, 10, OutlierSide::Both).unwrap();
        let got: Vec<(f64, Classification)> = out.iter().map(|(p, c)| (p.similarity.unwrap(), *c)).collect();
        assert_eq!(
            got,
            vec![
                (0.99, Classification::FP),
                (0.3, Classification::FN),
                (0.6, Classification::FP),
                (0.51, Classification::FP)
            ]
        );
        let fps = select_outliers(&m, &truth, 0.5, 1, OutlierSide::FalseNegatives).unwrap();
        assert_eq!(fps.len(), 1);
    }

    #[test]
    fn perfect_experiment_has_no_outliers() {
        let m = scored_pairs(&[0.9, 0.8]);
        let truth = Clustering::from_labels(&[0, 0, 0]);
        assert!(select_outliers(&m, &truth, 0.5, 5, OutlierSide::Both).unwrap().is_empty());
    }

    #[test]
    fn class_based_allocation_follows_class_shares() {
        assert_eq!(largest_remainder(4, &[3, 1]), vec![3, 1]);
        assert_eq!(largest_remainder(3, &[1, 1]), vec![2, 1]);
        assert_eq!(largest_remainder(5, &[0, 7]), vec![0, 5]);
    }

    #[test]
    fn quantiles_are_evenly_spaced() {
        assert_eq!(quantile_positions(5, 5), vec![0, 1, 2, 3, 4]);
        assert_eq!(quantile_positions(9, 5), vec![0, 2, 4, 6, 8]);
        assert_eq!(quantile_positions(7, 1), vec![3]);
        assert_eq!(quantile_positions(3, 8), vec![0, 1, 2]);
    }

    #[test]
    fn partitions_tile_the_sorted_matches() {
        let m = scored_pairs(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]);
        let parts = select_representatives(&m, None, 0.5, 3, 10, Sampler::Random, 7).unwrap();
        assert_eq!(parts.iter().map(|p| p.size).collect::<Vec<_>>(), vec![3, 2, 2]);
        assert_eq!(parts[0].range, [0.5, 0.7]);
        assert_eq!(parts[2].range, [0.1, 0.2]);
        assert_eq!(parts.iter().map(|p| p.representatives.len()).sum::<usize>(), 7);
    }

    #[test]
    fn class_based_picks_by_share() {
        // four pairs above the threshold, three of them true
        let m = scored_pairs(&[0.9, 0.8, 0.7, 0.6]);
        let truth = Clustering::from_labels(&[0, 0, 0, 0, 1]);
        let parts = select_representatives(&m, Some(&truth), 0.5, 1, 4, Sampler::ClassBased, 1).unwrap();
        assert_eq!(parts[0].matrix, Some(ConfusionMatrix::new(3, 1, 0, 0)));
        assert_eq!(parts[0].representatives.len(), 4);
        let two = select_representatives(&m, Some(&truth), 0.5, 1, 2, Sampler::ClassBased, 1).unwrap();
        let correct = two[0]
            .representatives
            .iter()
            .filter(|p| truth.same_cluster(p.pair.low(), p.pair.high()))
            .count();
        assert_eq!(correct, 2);
    }

    #[test]
    fn random_sampling_is_reproducible() {
        let m = scored_pairs(&(0..50).map(|i| i as f64 / 50.0).collect::<Vec<_>>());
        let a = select_representatives(&m, None, 0.5, 2, 3, Sampler::Random, 42).unwrap();
        let b = select_representatives(&m, None, 0.5, 2, 3, Sampler::Random, 42).unwrap();
        assert_eq!(a, b);
    }
}
