//! Set algebra over the pair sets of experiments and gold standards.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::datamodel::{Dataset, Experiment, GoldStandard};
use crate::error::{Error, Result};
use crate::pair::Pair;

/// Which pairs of an experiment count as its matches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PairMode {
    /// Every pair inside a cluster of the transitive closure.
    #[default]
    Closure,
    /// Only matches the solution emitted; closure-added pairs are hidden.
    OriginalOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SourceKind {
    Experiment,
    GoldStandard,
}

/// An experiment or gold standard prepared for set operations.
#[derive(Clone, Debug)]
pub struct PairSource {
    pub id: String,
    pub name: String,
    pub dataset_id: String,
    pub kind: SourceKind,
    clustering: Clustering,
    original: HashSet<Pair>,
    similarities: HashMap<Pair, f64>,
}

impl PairSource {
    pub fn from_experiment(experiment: &Experiment, dataset: &Dataset) -> Self {
        PairSource {
            id: experiment.id.clone(),
            name: experiment.name.clone(),
            dataset_id: experiment.dataset_id.clone(),
            kind: SourceKind::Experiment,
            clustering: experiment.clustering(dataset.len()),
            original: experiment.original_pairs().into_iter().collect(),
            similarities: experiment
                .matches
                .iter()
                .filter_map(|m| m.similarity.map(|s| (m.pair, s)))
                .collect(),
        }
    }

    pub fn from_gold_standard(gold: &GoldStandard) -> Self {
        Self::from_clustering(&gold.id, &gold.name, &gold.dataset_id, SourceKind::GoldStandard, gold.clustering.clone())
    }

    /// A source whose original pairs are exactly its closure pairs.
    pub fn from_clustering(id: &str, name: &str, dataset_id: &str, kind: SourceKind, clustering: Clustering) -> Self {
        PairSource {
            id: id.to_owned(),
            name: name.to_owned(),
            dataset_id: dataset_id.to_owned(),
            kind,
            original: clustering.closure_pairs().into_iter().collect(),
            clustering,
            similarities: HashMap::new(),
        }
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn similarity(&self, pair: Pair) -> Option<f64> {
        self.similarities.get(&pair).copied()
    }

    pub fn contains(&self, pair: Pair, mode: PairMode) -> bool {
        match (mode, self.kind) {
            (PairMode::OriginalOnly, SourceKind::Experiment) => self.original.contains(&pair),
            _ => self.clustering.same_cluster(pair.low(), pair.high()),
        }
    }

    fn size(&self, mode: PairMode) -> u64 {
        match (mode, self.kind) {
            (PairMode::OriginalOnly, SourceKind::Experiment) => self.original.len() as u64,
            _ => self.clustering.total_pairs(),
        }
    }

    /// The pair set under `mode`, sorted.
    pub fn pairs(&self, mode: PairMode) -> Vec<Pair> {
        match (mode, self.kind) {
            (PairMode::OriginalOnly, SourceKind::Experiment) => {
                let mut v: Vec<Pair> = self.original.iter().copied().collect();
                v.sort_unstable();
                v
            }
            _ => self.clustering.closure_pairs(),
        }
    }
}

/// `(⋂ include) \ (⋃ exclude)` by source references (ids or names).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SetExpression {
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub pair_mode: PairMode,
}

fn check_sources(include: &[&PairSource], exclude: &[&PairSource]) -> Result<()> {
    let first = include.first().ok_or(Error::EmptyInclude)?;
    if include
        .iter()
        .chain(exclude)
        .any(|s| s.dataset_id != first.dataset_id)
    {
        return Err(Error::MixedDatasets);
    }
    Ok(())
}

/// Sorted pairs in every `include` source and in no `exclude` source.
pub fn evaluate_set_expression(include: &[&PairSource], exclude: &[&PairSource], mode: PairMode) -> Result<Vec<Pair>> {
    check_sources(include, exclude)?;
    let smallest = include
        .iter()
        .min_by_key(|s| s.size(mode))
        .expect("include checked non-empty");
    Ok(smallest
        .pairs(mode)
        .into_iter()
        .filter(|&p| include.iter().all(|s| s.contains(p, mode)))
        .filter(|&p| !exclude.iter().any(|s| s.contains(p, mode)))
        .collect())
}

/// Pair count of one Venn region, identified by the sources it lies in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VennRegion {
    /// Bit `i` is set when the region lies inside source `i`.
    pub mask: u32,
    pub count: u64,
    pub expression: SetExpression,
}

/// Pair counts for all `2^n - 1` regions of 2 to 4 sources, ordered by mask.
pub fn venn_regions(sources: &[&PairSource], mode: PairMode) -> Result<Vec<VennRegion>> {
    if sources.len() > 4 {
        return Err(Error::TooManySources(sources.len()));
    }
    if sources.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a Venn diagram needs 2 to 4 sources, got {}",
            sources.len()
        )));
    }
    if sources.iter().any(|s| s.dataset_id != sources[0].dataset_id) {
        return Err(Error::MixedDatasets);
    }
    let mut counts: BTreeMap<u32, u64> = (1..1u32 << sources.len()).map(|m| (m, 0)).collect();
    let mut seen: HashSet<Pair> = HashSet::new();
    for source in sources {
        for pair in source.pairs(mode) {
            if !seen.insert(pair) {
                continue;
            }
            let mask = sources
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains(pair, mode))
                .fold(0u32, |m, (i, _)| m | 1 << i);
            *counts.get_mut(&mask).expect("mask of a member pair is non-zero") += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(mask, count)| {
            let (inside, outside): (Vec<_>, Vec<_>) = sources
                .iter()
                .enumerate()
                .partition(|(i, _)| mask & (1 << i) != 0);
            VennRegion {
                mask,
                count,
                expression: SetExpression {
                    include: inside.into_iter().map(|(_, s)| s.id.clone()).collect(),
                    exclude: outside.into_iter().map(|(_, s)| s.id.clone()).collect(),
                    pair_mode: mode,
                },
            }
        })
        .collect())
}

/// Confusion-matrix cell of a pair relative to an experiment and a gold standard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    TP,
    FP,
    FN,
    TN,
}

impl Classification {
    pub fn of(predicted: bool, actual: bool) -> Self {
        match (predicted, actual) {
            (true, true) => Classification::TP,
            (true, false) => Classification::FP,
            (false, true) => Classification::FN,
            (false, false) => Classification::TN,
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, Classification::TP | Classification::TN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordView {
    pub id: String,
    pub values: Vec<Option<String>>,
}

impl RecordView {
    pub fn of(dataset: &Dataset, record: usize) -> Self {
        RecordView {
            id: dataset.native_id(record).to_owned(),
            values: dataset.values(record).to_vec(),
        }
    }
}

/// A pair with both full records and how each source labels it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairView {
    pub pair: Pair,
    pub records: [RecordView; 2],
    pub similarity: Option<f64>,
    /// Source id to whether that source matches the pair.
    pub labels: BTreeMap<String, bool>,
    /// Present when the sources include an experiment and a gold standard;
    /// relative to the first of each.
    pub classification: Option<Classification>,
}

impl PairView {
    pub fn new(dataset: &Dataset, pair: Pair, sources: &[&PairSource], mode: PairMode) -> Self {
        let experiment = sources.iter().find(|s| s.kind == SourceKind::Experiment);
        let gold = sources.iter().find(|s| s.kind == SourceKind::GoldStandard);
        PairView {
            pair,
            records: [RecordView::of(dataset, pair.low()), RecordView::of(dataset, pair.high())],
            similarity: sources.iter().find_map(|s| s.similarity(pair)),
            labels: sources
                .iter()
                .map(|s| (s.id.clone(), s.contains(pair, mode)))
                .collect(),
            classification: experiment
                .zip(gold)
                .map(|(e, g)| Classification::of(e.contains(pair, mode), g.contains(pair, mode))),
        }
    }
}
