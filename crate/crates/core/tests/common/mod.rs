//! Brute-force oracles shared by the integration tests. Nothing here uses
//! union-find or the library's own ordering code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use erbench_core::{Pair, ScoredPair};
use rand::Rng;

/// Every partition of `0..n` as a restricted growth string.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for label in 0..=limit {
            prefix.push(label);
            extend(prefix, n, max.max(label), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), n, 0, &mut out);
    out
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Labels of the connected components of the graph with the given edges,
/// found by breadth-first search.
pub fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adjacency[x] {
                if label[y] == usize::MAX {
                    label[y] = next;
                    queue.push_back(y);
                }
            }
        }
        next += 1;
    }
    label
}

/// `(tp, fp, fn, tn)` by enumerating every pair.
pub fn brute_confusion(experiment: &[usize], truth: &[usize]) -> (u64, u64, u64, u64) {
    let mut m = (0, 0, 0, 0);
    for (a, b) in all_pairs(truth.len()) {
        match (experiment[a] == experiment[b], truth[a] == truth[b]) {
            (true, true) => m.0 += 1,
            (true, false) => m.1 += 1,
            (false, true) => m.2 += 1,
            (false, false) => m.3 += 1,
        }
    }
    m
}

/// Confusion matrices after each of `samples - 1` evenly sized batches of
/// matches taken in descending similarity order (unscored first, ties by
/// pair; leftover matches one each to the earliest batches).
pub fn brute_sequence(
    n: usize,
    matches: &[ScoredPair],
    truth: &[usize],
    samples: usize,
) -> Vec<(u64, u64, u64, u64)> {
    let mut ordered: Vec<(f64, usize, usize)> = matches
        .iter()
        .map(|m| (m.similarity.unwrap_or(f64::INFINITY), m.pair.low(), m.pair.high()))
        .collect();
    ordered.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap()
            .then((x.1, x.2).cmp(&(y.1, y.2)))
    });
    let batches = samples - 1;
    let mut applied = 0;
    let mut out = Vec::new();
    for i in 0..=batches {
        if i > 0 {
            applied += ordered.len() / batches + usize::from(i - 1 < ordered.len() % batches);
        }
        let edges: Vec<(usize, usize)> = ordered[..applied].iter().map(|&(_, a, b)| (a, b)).collect();
        out.push(brute_confusion(&components(n, &edges), truth));
    }
    out
}

/// Canonical form of a partition: sorted list of sorted blocks.
pub fn blocks(labels: &[usize]) -> BTreeSet<BTreeSet<usize>> {
    let mut by_label: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for (r, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().insert(r);
    }
    by_label.into_values().collect()
}

/// Fewest unit-cost merges and splits turning `source` into `target`,
/// by breadth-first search over all partitions.
pub fn merge_split_distance(source: &[usize], target: &[usize]) -> usize {
    type Partition = BTreeSet<BTreeSet<usize>>;
    let start = blocks(source);
    let goal = blocks(target);
    let mut seen: HashSet<Partition> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0)]);
    while let Some((p, d)) = queue.pop_front() {
        if p == goal {
            return d;
        }
        let list: Vec<&BTreeSet<usize>> = p.iter().collect();
        let mut next: Vec<Partition> = Vec::new();
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                let mut q = p.clone();
                q.remove(list[i]);
                q.remove(list[j]);
                q.insert(list[i].union(list[j]).copied().collect());
                next.push(q);
            }
            let members: Vec<usize> = list[i].iter().copied().collect();
            // every split into two non-empty parts; the first member stays left
            for mask in 1..(1u32 << (members.len() - 1)) {
                let right: BTreeSet<usize> = members[1..]
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &r)| r)
                    .collect();
                let left: BTreeSet<usize> = list[i].difference(&right).copied().collect();
                let mut q = p.clone();
                q.remove(list[i]);
                q.insert(left);
                q.insert(right);
                next.push(q);
            }
        }
        for q in next {
            if seen.insert(q.clone()) {
                queue.push_back((q, d + 1));
            }
        }
    }
    unreachable!("every partition is reachable by merges and splits")
}

pub fn random_labels(rng: &mut impl Rng, n: usize, max_label: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..=max_label)).collect()
}

/// Random distinct matches; each is unscored with probability 1/10 and
/// scores are drawn from a small grid so that ties occur.
pub fn random_matches(rng: &mut impl Rng, n: usize, count: usize) -> Vec<ScoredPair> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for _ in 0..count {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if let Some(p) = Pair::new(a, b) {
            if seen.insert(p) {
                let sim = (rng.gen_range(0..10) != 0).then(|| rng.gen_range(0..20) as f64 / 20.0);
                out.push(ScoredPair::new(p, sim));
            }
        }
    }
    out
}
