//! Exploring results: set algebra over experiments and gold standards,
//! pair selection and sorting, error analysis, attribute diagnostics and
//! diagrams.

mod diagnostics;
mod diagrams;
mod entropy;
mod explain;
mod selection;
mod sets;

pub use diagnostics::{equal_ratio, null_ratio, AttributeRatio, PairUniverse, ALL_PAIRS_LIMIT};
pub use diagrams::{
    effort_metric_diagram, metric_metric_diagram, DiagramPoint, EffortPoint, EffortSample, EffortSeries,
};
pub use entropy::{sort_pairs, ColumnEntropy, Direction, SortKey};
pub use explain::{
    cap_candidates, explain_error, levenshtein_similarity, minkowski, Explanation, DEFAULT_CANDIDATE_CAP,
};
pub use selection::{
    largest_remainder, select_around_threshold, select_outliers, select_representatives, OutlierSide,
    PartitionSummary, Sampler,
};
pub use sets::{
    evaluate_set_expression, venn_regions, Classification, PairMode, PairSource, PairView, RecordView,
    SetExpression, SourceKind, VennRegion,
};

use crate::datamodel::Store;
use crate::error::{Error, Result};

/// Resolves an experiment or gold standard reference (id or name).
pub fn resolve_source(store: &Store, key: &str) -> Result<PairSource> {
    if let Ok(e) = store.experiment(key) {
        let dataset = store.dataset(&e.dataset_id)?;
        return Ok(PairSource::from_experiment(e, dataset));
    }
    match store.gold_standard(key) {
        Ok(g) => Ok(PairSource::from_gold_standard(g)),
        Err(_) => Err(Error::not_found("experiment or gold standard", key)),
    }
}
