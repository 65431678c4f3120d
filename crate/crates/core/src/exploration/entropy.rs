//! Token entropy of attribute values and pair sorting.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::pair::{Pair, RecordId, ScoredPair};

/// Entropy score of every cell of a dataset.
///
/// A cell scores `Σ_t p_t · -ln(c_t)` over its distinct whitespace tokens,
/// where `p_t` is the token's share among the cell's tokens and `c_t` its
/// share among all tokens of the column. Null cells score 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnEntropy {
    cells: Vec<Vec<f64>>,
    records: Vec<f64>,
}

impl ColumnEntropy {
    pub fn of(dataset: &Dataset) -> Self {
        let width = dataset.attribute_names().len();
        let mut columns: Vec<HashMap<&str, u64>> = vec![HashMap::new(); width];
        let mut totals = vec![0u64; width];
        for (_, values) in dataset.rows() {
            for (a, value) in values.iter().enumerate() {
                for token in value.iter().flat_map(|v| v.split_whitespace()) {
                    *columns[a].entry(token).or_default() += 1;
                    totals[a] += 1;
                }
            }
        }
        let cells: Vec<Vec<f64>> = dataset
            .rows()
            .map(|(_, values)| {
                values
                    .iter()
                    .enumerate()
                    .map(|(a, value)| {
                        let Some(v) = value else { return 0.0 };
                        let mut own: HashMap<&str, u64> = HashMap::new();
                        let mut n = 0u64;
                        for token in v.split_whitespace() {
                            *own.entry(token).or_default() += 1;
                            n += 1;
                        }
                        own.iter()
                            .map(|(t, &k)| {
                                let column_share = columns[a][t] as f64 / totals[a] as f64;
                                (k as f64 / n as f64) * -column_share.ln()
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let records = cells.iter().map(|row| row.iter().sum()).collect();
        ColumnEntropy { cells, records }
    }

    pub fn cell(&self, record: RecordId, attribute: usize) -> f64 {
        self.cells[record][attribute]
    }

    pub fn record(&self, record: RecordId) -> f64 {
        self.records[record]
    }

    /// Sum of all cell scores of both records.
    pub fn pair(&self, pair: Pair) -> f64 {
        self.records[pair.low()] + self.records[pair.high()]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SortKey {
    #[default]
    Similarity,
    Entropy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Direction {
    Ascending,
    #[default]
    Descending,
}

/// Orders pairs by similarity or entropy, ties broken by pair order.
/// Descending order is the exact reverse of ascending order.
pub fn sort_pairs(
    pairs: &[ScoredPair],
    key: SortKey,
    direction: Direction,
    entropy: Option<&ColumnEntropy>,
) -> Result<Vec<ScoredPair>> {
    let keyed: Vec<(f64, ScoredPair)> = match key {
        SortKey::Similarity => pairs
            .iter()
            .map(|p| p.similarity.map(|s| (s, *p)).ok_or(Error::NoSimilarities))
            .collect::<Result<_>>()?,
        SortKey::Entropy => {
            let e = entropy.ok_or_else(|| Error::InvalidArgument("entropy sorting needs column entropies".into()))?;
            pairs.iter().map(|p| (e.pair(p.pair), *p)).collect()
        }
    };
    let mut keyed = keyed;
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.pair.cmp(&b.1.pair)));
    if direction == Direction::Descending {
        keyed.reverse();
    }
    Ok(keyed.into_iter().map(|(_, p)| p).collect())
}
