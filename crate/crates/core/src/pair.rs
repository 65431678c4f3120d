//! Record pairs in canonical order.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense numeric record id, assigned at import time in `0..record_count`.
pub type RecordId = usize;

/// Unordered pair of distinct records stored as `(low, high)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[RecordId; 2]", try_from = "[RecordId; 2]")]
pub struct Pair {
    low: RecordId,
    high: RecordId,
}

impl Pair {
    /// Canonicalizes `(a, b)`; returns `None` for a self pair.
    pub fn new(a: RecordId, b: RecordId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Pair { low: a, high: b }),
            std::cmp::Ordering::Greater => Some(Pair { low: b, high: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn low(self) -> RecordId {
        self.low
    }

    pub fn high(self) -> RecordId {
        self.high
    }

    pub fn records(self) -> (RecordId, RecordId) {
        (self.low, self.high)
    }
}

impl From<Pair> for [RecordId; 2] {
    fn from(p: Pair) -> Self {
        [p.low, p.high]
    }
}

impl TryFrom<[RecordId; 2]> for Pair {
    type Error = String;

    fn try_from(value: [RecordId; 2]) -> Result<Self, Self::Error> {
        Pair::new(value[0], value[1]).ok_or_else(|| format!("self pair ({0}, {0})", value[0]))
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.low, self.high)
    }
}

/// A match emitted by a matching solution, optionally scored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub pair: Pair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
}

impl ScoredPair {
    pub fn new(pair: Pair, similarity: Option<f64>) -> Self {
        ScoredPair { pair, similarity }
    }
}

/// Orders matches by descending similarity, unscored matches first, ties by pair.
pub fn by_descending_similarity(a: &ScoredPair, b: &ScoredPair) -> std::cmp::Ordering {
    let key = |s: &ScoredPair| s.similarity.unwrap_or(f64::INFINITY);
    key(b)
        .total_cmp(&key(a))
        .then_with(|| a.pair.cmp(&b.pair))
}
