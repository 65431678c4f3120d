//! Evaluation engine for entity-resolution (data matching) results.
//!
//! The crate ingests datasets, gold standards and experiments, computes
//! pair- and cluster-based quality metrics, and supports exploring results
//! through set algebra, pair selection, sorting and error analysis.
//! Metric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the store and service use.

pub mod clustering;
pub mod datamodel;
pub mod error;
pub mod exploration;
pub mod metrics;
pub mod pair;
pub mod scalar;
pub mod softkpi;
pub mod synthetic;

pub use clustering::{Clustering, ConfusionMatrix, DynamicIntersection, MergeRecord};
pub use error::{Error, ErrorKind, Result};
pub use pair::{Pair, RecordId, ScoredPair};
pub use scalar::Scalar;

pub use datamodel::{Dataset, Experiment, GoldStandard, MatchingSolution, Store};
pub use metrics::PairMetric;

pub type Metric = metrics::MetricValue<f64>;
pub type Profile = metrics::DatasetProfile<f64>;
pub type Weights = metrics::ProfileWeights<f64>;
pub type Rates = softkpi::RateTable<f64>;
pub type Aggregation = softkpi::AggregationSpec<f64>;
