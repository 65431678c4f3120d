//! Datasets, gold standards, experiments and matching solutions, their CSV
//! import and the file-backed store holding them.

mod dataset;
mod entities;
mod import;
mod store;

pub use dataset::{Dataset, DatasetBuilder};
pub use entities::{Experiment, GoldStandard, MatchRecord, MatchingSolution};
pub use import::{read_dataset, read_experiment, read_gold_standard, ImportFormat, ImportSpec};
pub use store::Store;
