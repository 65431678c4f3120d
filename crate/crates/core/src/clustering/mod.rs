//! Union-find clustering, the dynamic intersection of two clusterings, and
//! confusion-matrix sequences across similarity thresholds.

mod confusion;
mod intersection;
mod union_find;

pub use confusion::{
    closure_deficiency, confusion_between, confusion_from_counts, confusion_matrix_sequence,
    confusion_sequence_for_plan, naive_confusion_sequence, ConfusionMatrix, SamplePlan,
};
pub use intersection::DynamicIntersection;
pub use union_find::{ClusterId, Clustering, MergeRecord};
