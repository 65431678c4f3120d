use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::RecordId;

/// Record table plus the native id ↔ dense id mapping.
///
/// Dense ids are row positions, assigned in order of first appearance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", from = "DatasetRepr")]
pub struct Dataset {
    pub id: String,
    pub name: String,
    attribute_names: Vec<String>,
    native_ids: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
    #[serde(skip)]
    index: HashMap<String, RecordId>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct DatasetRepr {
    id: String,
    name: String,
    attribute_names: Vec<String>,
    native_ids: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

impl From<DatasetRepr> for Dataset {
    fn from(r: DatasetRepr) -> Self {
        let index = r
            .native_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Dataset {
            id: r.id,
            name: r.name,
            attribute_names: r.attribute_names,
            native_ids: r.native_ids,
            rows: r.rows,
            index,
        }
    }
}

/// Builder that enforces the dataset invariants row by row.
#[derive(Debug)]
pub struct DatasetBuilder {
    attribute_names: Vec<String>,
    native_ids: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
    index: HashMap<String, RecordId>,
}

impl DatasetBuilder {
    pub fn new(attribute_names: Vec<String>) -> Self {
        DatasetBuilder {
            attribute_names,
            native_ids: Vec::new(),
            rows: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, native_id: &str, values: Vec<Option<String>>) -> Result<RecordId> {
        if values.len() != self.attribute_names.len() {
            return Err(Error::RowArity {
                row: self.rows.len() + 1,
                expected: self.attribute_names.len(),
                found: values.len(),
            });
        }
        if self.index.contains_key(native_id) {
            return Err(Error::DuplicateRecordId(native_id.to_owned()));
        }
        let dense = self.native_ids.len();
        self.index.insert(native_id.to_owned(), dense);
        self.native_ids.push(native_id.to_owned());
        self.rows.push(values);
        Ok(dense)
    }

    pub fn build(self, id: String, name: String) -> Dataset {
        Dataset {
            id,
            name,
            attribute_names: self.attribute_names,
            native_ids: self.native_ids,
            rows: self.rows,
            index: self.index,
        }
    }
}

impl Dataset {
    /// Convenience constructor for in-memory datasets.
    pub fn from_rows<S: AsRef<str>>(
        name: &str,
        attribute_names: &[S],
        rows: &[(&str, Vec<Option<&str>>)],
    ) -> Result<Self> {
        let mut b = DatasetBuilder::new(attribute_names.iter().map(|s| s.as_ref().to_owned()).collect());
        for (id, values) in rows {
            b.push(id, values.iter().map(|v| v.map(str::to_owned)).collect())?;
        }
        Ok(b.build(name.to_owned(), name.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.native_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.native_ids.is_empty()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn dense_id(&self, native_id: &str) -> Option<RecordId> {
        self.index.get(native_id).copied()
    }

    pub fn require_dense_id(&self, native_id: &str) -> Result<RecordId> {
        self.dense_id(native_id)
            .ok_or_else(|| Error::UnknownRecordId(native_id.to_owned()))
    }

    pub fn native_id(&self, record: RecordId) -> &str {
        &self.native_ids[record]
    }

    pub fn native_ids(&self) -> &[String] {
        &self.native_ids
    }

    /// Attribute values of `record`; `None` is null.
    pub fn values(&self, record: RecordId) -> &[Option<String>] {
        &self.rows[record]
    }

    pub fn value(&self, record: RecordId, attribute: usize) -> Option<&str> {
        self.rows[record][attribute].as_deref()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[Option<String>])> {
        self.native_ids
            .iter()
            .map(String::as_str)
            .zip(self.rows.iter().map(Vec::as_slice))
    }

    /// Writes the dataset as CSV with the id column first; nulls become empty fields.
    pub fn write_csv(&self, writer: impl Write, id_column: &str, separator: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(separator).from_writer(writer);
        w.write_record(std::iter::once(id_column).chain(self.attribute_names.iter().map(String::as_str)))?;
        for (id, values) in self.rows() {
            w.write_record(
                std::iter::once(id).chain(values.iter().map(|v| v.as_deref().unwrap_or(""))),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}
