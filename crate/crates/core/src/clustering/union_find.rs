//! Union-find clustering that tracks intra-cluster pair counts and cluster ids.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::pair::{Pair, RecordId};
use crate::scalar::pairs_of;

/// Identifier of a cluster. Every union hands out a fresh id.
pub type ClusterId = usize;

/// Result of one batched union: the pre-batch clusters now contained in `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub sources: Vec<ClusterId>,
    pub target: ClusterId,
}

/// Disjoint-set partition of the records `0..len`.
///
/// Union by size with path compression. Cluster ids live at the root slot
/// and are drawn from a generation counter, so an id is never reused once
/// its cluster has been absorbed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "Assignment", into = "Assignment")]
pub struct Clustering {
    parent: Vec<RecordId>,
    size: Vec<usize>,
    ids: Vec<ClusterId>,
    total_pairs: u64,
    next_id: ClusterId,
}

impl Clustering {
    /// `n` clusters of size one; record `r` lives in cluster `r`.
    pub fn singletons(n: usize) -> Self {
        Clustering {
            parent: (0..n).collect(),
            size: vec![1; n],
            ids: (0..n).collect(),
            total_pairs: 0,
            next_id: n,
        }
    }

    /// Groups records by label. Cluster ids are assigned `0..k` in order of
    /// first appearance, so equal partitions produce identical values.
    pub fn from_labels<L: Hash + Eq>(labels: &[L]) -> Self {
        let mut first_of: HashMap<&L, RecordId> = HashMap::new();
        let n = labels.len();
        let mut parent = Vec::with_capacity(n);
        let mut size = vec![0; n];
        let mut ids = vec![0; n];
        let mut next_id = 0;
        for (record, label) in labels.iter().enumerate() {
            let root = *first_of.entry(label).or_insert_with(|| {
                ids[record] = next_id;
                next_id += 1;
                record
            });
            parent.push(root);
            size[root] += 1;
        }
        let total_pairs = size.iter().map(|&s| pairs_of(s)).sum();
        Clustering {
            parent,
            size,
            ids,
            total_pairs,
            next_id,
        }
    }

    /// Transitive closure of `pairs` over `n` records, in canonical form.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = Pair>) -> Self {
        let mut clustering = Clustering::singletons(n);
        for pair in pairs {
            clustering.union(pair.low(), pair.high());
        }
        clustering.canonical()
    }

    /// Same partition with compact, first-appearance cluster ids.
    pub fn canonical(&self) -> Self {
        Clustering::from_labels(&self.labels())
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Sum over clusters of `|c|·(|c|−1)/2`.
    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    pub fn cluster_count(&self) -> usize {
        (0..self.len()).filter(|&r| self.parent[r] == r).count()
    }

    /// Root lookup with path halving.
    pub fn find(&mut self, record: RecordId) -> RecordId {
        let mut x = record;
        while self.parent[x] != x {
            let grandparent = self.parent[self.parent[x]];
            self.parent[x] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Root lookup without mutation.
    pub fn root(&self, record: RecordId) -> RecordId {
        let mut x = record;
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub fn cluster_of(&self, record: RecordId) -> ClusterId {
        self.ids[self.root(record)]
    }

    pub fn cluster_size_of(&self, record: RecordId) -> usize {
        self.size[self.root(record)]
    }

    /// Intra-cluster pairs of the cluster containing `record`.
    pub fn cluster_pairs_of(&self, record: RecordId) -> u64 {
        pairs_of(self.cluster_size_of(record))
    }

    pub fn same_cluster(&self, a: RecordId, b: RecordId) -> bool {
        self.root(a) == self.root(b)
    }

    /// Merges the clusters of `a` and `b`; returns the fresh id of the
    /// merged cluster, or `None` when they were already together.
    pub fn union(&mut self, a: RecordId, b: RecordId) -> Option<ClusterId> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        Some(self.link(ra, rb))
    }

    fn link(&mut self, ra: RecordId, rb: RecordId) -> ClusterId {
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.total_pairs -= pairs_of(self.size[big]) + pairs_of(self.size[small]);
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.total_pairs += pairs_of(self.size[big]);
        let id = self.next_id;
        self.next_id += 1;
        self.ids[big] = id;
        id
    }

    /// Unions every pair in the batch and reports, for each cluster created
    /// by the batch that survived it, which pre-batch clusters it absorbed.
    /// Pairs already in one cluster are no-ops.
    pub fn tracked_union(
        &mut self,
        pairs: impl IntoIterator<Item = (RecordId, RecordId)>,
    ) -> Vec<MergeRecord> {
        let mut pending: HashMap<RecordId, Vec<ClusterId>> = HashMap::new();
        for (a, b) in pairs {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            let mut sources = pending
                .remove(&ra)
                .unwrap_or_else(|| vec![self.ids[ra]]);
            sources.extend(pending.remove(&rb).unwrap_or_else(|| vec![self.ids[rb]]));
            self.link(ra, rb);
            let root = if self.parent[ra] == ra { ra } else { rb };
            pending.insert(root, sources);
        }
        let mut merges: Vec<MergeRecord> = pending
            .into_iter()
            .map(|(root, mut sources)| {
                sources.sort_unstable();
                MergeRecord {
                    sources,
                    target: self.ids[root],
                }
            })
            .collect();
        merges.sort_unstable_by_key(|m| m.target);
        merges
    }

    /// Cluster id of every record.
    pub fn labels(&self) -> Vec<ClusterId> {
        (0..self.len()).map(|r| self.cluster_of(r)).collect()
    }

    /// Member lists, each sorted, ordered by smallest member.
    pub fn clusters(&self) -> Vec<Vec<RecordId>> {
        let mut slot: HashMap<RecordId, usize> = HashMap::new();
        let mut out: Vec<Vec<RecordId>> = Vec::new();
        for r in 0..self.len() {
            let root = self.root(r);
            let idx = *slot.entry(root).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[idx].push(r);
        }
        out
    }

    /// Every intra-cluster pair, sorted.
    pub fn closure_pairs(&self) -> Vec<Pair> {
        let mut pairs = Vec::with_capacity(self.total_pairs as usize);
        for members in self.clusters() {
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    pairs.extend(Pair::new(a, b));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    /// Partition equality, ignoring cluster ids.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.len() == other.len() && self.canonical().labels() == other.canonical().labels()
    }
}

impl PartialEq for Clustering {
    fn eq(&self, other: &Self) -> bool {
        self.same_partition(other)
    }
}

impl Eq for Clustering {}

/// Serialized form: one canonical cluster label per record.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Assignment {
    labels: Vec<ClusterId>,
}

impl From<Assignment> for Clustering {
    fn from(a: Assignment) -> Self {
        Clustering::from_labels(&a.labels)
    }
}

impl From<Clustering> for Assignment {
    fn from(c: Clustering) -> Self {
        Assignment {
            labels: c.canonical().labels(),
        }
    }
}
