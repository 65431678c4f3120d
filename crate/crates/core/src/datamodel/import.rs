//! Delimited-text import of datasets, gold standards and experiments.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DatasetBuilder};
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::pair::{Pair, RecordId, ScoredPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ImportFormat {
    DatasetCsv,
    GoldPairsCsv,
    GoldClusterColumnCsv,
    ExperimentCsv,
}

/// How to read a delimited file and which columns carry what.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ImportSpec {
    pub format: ImportFormat,
    pub separator: char,
    pub quote: char,
    /// Escape character inside quoted fields; `None` means quotes are doubled.
    pub escape: Option<char>,
    /// One column for datasets and cluster-column gold standards, two for pair files.
    pub id_columns: Vec<String>,
    pub similarity_column: Option<String>,
    pub cluster_column: Option<String>,
}

impl Default for ImportSpec {
    fn default() -> Self {
        ImportSpec::dataset("id")
    }
}

impl ImportSpec {
    fn with(format: ImportFormat, id_columns: &[&str]) -> Self {
        ImportSpec {
            format,
            separator: ',',
            quote: '"',
            escape: None,
            id_columns: id_columns.iter().map(|s| (*s).to_owned()).collect(),
            similarity_column: None,
            cluster_column: None,
        }
    }

    pub fn dataset(id_column: &str) -> Self {
        Self::with(ImportFormat::DatasetCsv, &[id_column])
    }

    pub fn gold_pairs(a: &str, b: &str) -> Self {
        Self::with(ImportFormat::GoldPairsCsv, &[a, b])
    }

    pub fn gold_clusters(id_column: &str, cluster_column: &str) -> Self {
        ImportSpec {
            cluster_column: Some(cluster_column.to_owned()),
            ..Self::with(ImportFormat::GoldClusterColumnCsv, &[id_column])
        }
    }

    pub fn experiment(a: &str, b: &str, similarity_column: Option<&str>) -> Self {
        ImportSpec {
            similarity_column: similarity_column.map(str::to_owned),
            ..Self::with(ImportFormat::ExperimentCsv, &[a, b])
        }
    }

    fn byte(c: char, what: &str) -> Result<u8> {
        u8::try_from(u32::from(c))
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::InvalidArgument(format!("{what} must be a single ASCII character")))
    }

    fn reader<R: Read>(&self, input: R) -> Result<csv::Reader<R>> {
        let mut b = csv::ReaderBuilder::new();
        b.delimiter(Self::byte(self.separator, "separator")?)
            .quote(Self::byte(self.quote, "quote")?)
            .flexible(true)
            .has_headers(true);
        if let Some(e) = self.escape {
            b.escape(Some(Self::byte(e, "escape")?)).double_quote(false);
        }
        Ok(b.from_reader(input))
    }

    fn expect_format(&self, allowed: &[ImportFormat]) -> Result<()> {
        if allowed.contains(&self.format) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "import format {:?} cannot be used here",
                self.format
            )))
        }
    }

    fn id_column_count(&self, expected: usize) -> Result<()> {
        if self.id_columns.len() == expected {
            Ok(())
        } else {
            Err(Error::Schema(format!(
                "expected {expected} id column(s), got {}",
                self.id_columns.len()
            )))
        }
    }
}

/// Parsed header plus data rows, with arity checked.
struct Table {
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read<R: Read>(spec: &ImportSpec, input: R) -> Result<Self> {
        let mut reader = spec.reader(input)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            // a completely empty line carries no record
            if record.len() == 1 && record[0].is_empty() && header.len() > 1 {
                continue;
            }
            if record.len() != header.len() {
                return Err(Error::RowArity {
                    row: i + 1,
                    expected: header.len(),
                    found: record.len(),
                });
            }
            rows.push(record);
        }
        Ok(Table { header, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in header")))
    }
}

/// Empty fields (quoted or not) are null.
fn nullable(field: &str) -> Option<String> {
    (!field.is_empty()).then(|| field.to_owned())
}

pub fn read_dataset<R: Read>(input: R, spec: &ImportSpec, id: String, name: String) -> Result<Dataset> {
    spec.expect_format(&[ImportFormat::DatasetCsv])?;
    spec.id_column_count(1)?;
    let table = Table::read(spec, input)?;
    let id_col = table.column(&spec.id_columns[0])?;
    let attributes = table
        .header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != id_col)
        .map(|(_, h)| h.clone())
        .collect();
    let mut builder = DatasetBuilder::new(attributes);
    for (i, row) in table.rows.iter().enumerate() {
        let native = row[id_col].trim();
        if native.is_empty() {
            return Err(Error::Value(format!("row {} has an empty id", i + 1)));
        }
        let values = row
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != id_col)
            .map(|(_, v)| nullable(v))
            .collect();
        builder.push(native, values)?;
    }
    Ok(builder.build(id, name))
}

fn pair_of(dataset: &Dataset, a: &str, b: &str) -> Result<Pair> {
    let (da, db) = (
        dataset.require_dense_id(a.trim())?,
        dataset.require_dense_id(b.trim())?,
    );
    Pair::new(da, db).ok_or_else(|| Error::SelfPair(a.trim().to_owned()))
}

/// Gold standard as a clustering of the dataset: the transitive closure of
/// a pair list, or the grouping by a cluster column. Records not mentioned
/// form singletons.
pub fn read_gold_standard<R: Read>(input: R, spec: &ImportSpec, dataset: &Dataset) -> Result<Clustering> {
    spec.expect_format(&[ImportFormat::GoldPairsCsv, ImportFormat::GoldClusterColumnCsv])?;
    let table = Table::read(spec, input)?;
    match spec.format {
        ImportFormat::GoldPairsCsv => {
            spec.id_column_count(2)?;
            let (ca, cb) = (table.column(&spec.id_columns[0])?, table.column(&spec.id_columns[1])?);
            let pairs = table
                .rows
                .iter()
                .map(|r| pair_of(dataset, &r[ca], &r[cb]))
                .collect::<Result<Vec<_>>>()?;
            Ok(Clustering::from_pairs(dataset.len(), pairs))
        }
        _ => {
            spec.id_column_count(1)?;
            let cluster_name = spec
                .cluster_column
                .as_deref()
                .ok_or_else(|| Error::Schema("cluster column not specified".into()))?;
            let (cid, ccl) = (table.column(&spec.id_columns[0])?, table.column(cluster_name)?);
            #[derive(Hash, PartialEq, Eq)]
            enum Label<'a> {
                Named(&'a str),
                Alone(RecordId),
            }
            let mut labels: Vec<Label<'_>> = (0..dataset.len()).map(Label::Alone).collect();
            let mut seen = vec![false; dataset.len()];
            for row in &table.rows {
                let record = dataset.require_dense_id(row[cid].trim())?;
                let label = row[ccl].trim();
                if label.is_empty() {
                    return Err(Error::Value(format!("record `{}` has an empty cluster label", &row[cid])));
                }
                if seen[record] && labels[record] != Label::Named(label) {
                    return Err(Error::Value(format!(
                        "record `{}` is assigned to more than one cluster",
                        &row[cid]
                    )));
                }
                seen[record] = true;
                labels[record] = Label::Named(label);
            }
            Ok(Clustering::from_labels(&labels))
        }
    }
}

/// Experiment matches, canonicalized and deduplicated; on collision the
/// larger similarity wins.
pub fn read_experiment<R: Read>(input: R, spec: &ImportSpec, dataset: &Dataset) -> Result<Vec<ScoredPair>> {
    spec.expect_format(&[ImportFormat::ExperimentCsv])?;
    spec.id_column_count(2)?;
    let table = Table::read(spec, input)?;
    let (ca, cb) = (table.column(&spec.id_columns[0])?, table.column(&spec.id_columns[1])?);
    let cs = spec.similarity_column.as_deref().map(|c| table.column(c)).transpose()?;

    let mut slot: HashMap<Pair, usize> = HashMap::new();
    let mut matches: Vec<ScoredPair> = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let pair = pair_of(dataset, &row[ca], &row[cb])?;
        let similarity = match cs.map(|c| row[c].trim()) {
            None | Some("") => None,
            Some(raw) => Some(
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Value(format!("row {}: similarity `{raw}` is not a finite number", i + 1)))?,
            ),
        };
        match slot.entry(pair) {
            Entry::Vacant(v) => {
                v.insert(matches.len());
                matches.push(ScoredPair::new(pair, similarity));
            }
            Entry::Occupied(o) => {
                let kept = &mut matches[*o.get()].similarity;
                *kept = match (*kept, similarity) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
            }
        }
    }
    Ok(matches)
}
