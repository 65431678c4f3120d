use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::Clustering;
use crate::pair::{Pair, ScoredPair};
use crate::softkpi::{ExperimentKpis, SolutionKpis};

/// A match of an experiment. `is_original` is false for pairs added by a
/// closure or clustering step rather than emitted by the matching solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchRecord {
    pub pair: Pair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
    pub is_original: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Experiment {
    pub id: String,
    pub name: String,
    pub dataset_id: String,
    #[serde(default)]
    pub solution_id: Option<String>,
    pub matches: Vec<MatchRecord>,
    #[serde(default)]
    pub soft_kpis: Option<ExperimentKpis>,
    pub content_hash: String,
}

impl Experiment {
    pub fn scored_pairs(&self) -> Vec<ScoredPair> {
        self.matches
            .iter()
            .map(|m| ScoredPair::new(m.pair, m.similarity))
            .collect()
    }

    pub fn original_pairs(&self) -> Vec<Pair> {
        self.matches
            .iter()
            .filter(|m| m.is_original)
            .map(|m| m.pair)
            .collect()
    }

    /// Transitive closure of all matches over `record_count` records.
    pub fn clustering(&self, record_count: usize) -> Clustering {
        Clustering::from_pairs(record_count, self.matches.iter().map(|m| m.pair))
    }

    pub fn has_similarities(&self) -> bool {
        self.matches.iter().any(|m| m.similarity.is_some())
    }

    /// Decision threshold assumed when none is given: the lowest similarity
    /// among original matches.
    pub fn default_threshold(&self) -> Option<f64> {
        self.matches
            .iter()
            .filter(|m| m.is_original)
            .filter_map(|m| m.similarity)
            .min_by(f64::total_cmp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldStandard {
    pub id: String,
    pub name: String,
    pub dataset_id: String,
    pub clustering: Clustering,
    pub content_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchingSolution {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub soft_kpis: SolutionKpis,
}

pub(crate) fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("entity content serializes");
    hex::encode(Sha256::digest(&bytes))
}
