//! Operations behind every HTTP route and CLI command.
//!
//! Requests and responses are plain serde types; [`Service`] owns the store
//! and the cache of confusion-matrix sequences.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard, RwLock, RwLockReadGuard, RwLockWriteGuard};

use erbench_core::clustering::{closure_deficiency, confusion_between, confusion_sequence_for_plan, SamplePlan};
use erbench_core::datamodel::ImportSpec;
use erbench_core::exploration::{
    cap_candidates, effort_metric_diagram, equal_ratio, evaluate_set_expression, explain_error,
    levenshtein_similarity, null_ratio, select_around_threshold, select_outliers, select_representatives,
    sort_pairs, venn_regions, AttributeRatio, Classification, ColumnEntropy, DiagramPoint, Direction,
    EffortSample, EffortSeries, Explanation, OutlierSide, PairMode, PairSource, PairUniverse, PairView,
    RecordView, Sampler, SortKey, SourceKind, VennRegion, DEFAULT_CANDIDATE_CAP,
};
use erbench_core::metrics::{
    closest_cluster_f1, majority_vote_deviation, pair_metrics, profile_dataset, rank_benchmark_datasets,
    unit_merge_distance, variation_of_information, RankedDataset,
};
use erbench_core::softkpi::{
    aggregate, decision_matrix, read_experiment_kpis_csv, read_solution_kpis_csv, DecisionRow, ExperimentKpis,
    ExperimentQuality, MetricSelection, SolutionKpis, SolutionRef,
};
use erbench_core::{
    Aggregation, Clustering, ConfusionMatrix, Dataset, Error, Experiment, GoldStandard, MatchingSolution, Metric,
    Pair, PairMetric, Profile, Rates, Result, ScoredPair, Store, Weights,
};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 100;

type SequenceKey = (String, String, usize);
type Sequence = Arc<Vec<(Option<f64>, ConfusionMatrix)>>;

pub struct Service {
    store: RwLock<Store>,
    sequences: Mutex<HashMap<SequenceKey, Sequence>>,
    page_size: usize,
}

// ---- resource types ----

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CsvOptions {
    pub separator: Option<String>,
    pub quote: Option<String>,
    pub escape: Option<String>,
}

fn single_char(value: &Option<String>, what: &str) -> Result<Option<char>> {
    let Some(v) = value else { return Ok(None) };
    let v = match v.as_str() {
        "\\t" | "tab" => "\t",
        other => other,
    };
    let mut chars = v.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(Some(c)),
        _ => Err(Error::InvalidArgument(format!("{what} must be a single character, got `{v}`"))),
    }
}

impl CsvOptions {
    fn apply(&self, mut spec: ImportSpec) -> Result<ImportSpec> {
        if let Some(c) = single_char(&self.separator, "separator")? {
            spec.separator = c;
        }
        if let Some(c) = single_char(&self.quote, "quote")? {
            spec.quote = c;
        }
        spec.escape = single_char(&self.escape, "escape")?;
        Ok(spec)
    }
}

fn default_id_column() -> String {
    "id".into()
}
fn default_first() -> String {
    "id1".into()
}
fn default_second() -> String {
    "id2".into()
}
fn default_cluster_column() -> String {
    "cluster".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetUpload {
    pub name: String,
    #[serde(default = "default_id_column")]
    pub id_column: String,
    #[serde(flatten)]
    pub csv: CsvOptions,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GoldFormat {
    #[default]
    Pairs,
    Clusters,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldUpload {
    pub dataset: String,
    pub name: String,
    #[serde(default)]
    pub format: GoldFormat,
    #[serde(default = "default_first")]
    pub first: String,
    #[serde(default = "default_second")]
    pub second: String,
    #[serde(default = "default_id_column")]
    pub id_column: String,
    #[serde(default = "default_cluster_column")]
    pub cluster_column: String,
    #[serde(flatten)]
    pub csv: CsvOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentUpload {
    pub dataset: String,
    pub name: String,
    pub solution: Option<String>,
    #[serde(default = "default_first")]
    pub first: String,
    #[serde(default = "default_second")]
    pub second: String,
    pub similarity: Option<String>,
    #[serde(flatten)]
    pub csv: CsvOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetSummary {
    pub id: String,
    pub name: String,
    pub records: usize,
    pub attributes: Vec<String>,
}

impl DatasetSummary {
    fn of(d: &Dataset) -> Self {
        DatasetSummary {
            id: d.id.clone(),
            name: d.name.clone(),
            records: d.len(),
            attributes: d.attribute_names().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldSummary {
    pub id: String,
    pub name: String,
    pub dataset_id: String,
    pub clusters: usize,
    pub duplicate_pairs: u64,
    pub content_hash: String,
}

impl GoldSummary {
    fn of(g: &GoldStandard) -> Self {
        GoldSummary {
            id: g.id.clone(),
            name: g.name.clone(),
            dataset_id: g.dataset_id.clone(),
            clusters: g.clustering.cluster_count(),
            duplicate_pairs: g.clustering.total_pairs(),
            content_hash: g.content_hash.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentSummary {
    pub id: String,
    pub name: String,
    pub dataset_id: String,
    pub solution_id: Option<String>,
    pub matches: usize,
    pub original_matches: usize,
    pub has_similarities: bool,
    pub default_threshold: Option<f64>,
    pub soft_kpis: Option<ExperimentKpis>,
    pub content_hash: String,
}

impl ExperimentSummary {
    fn of(e: &Experiment) -> Self {
        ExperimentSummary {
            id: e.id.clone(),
            name: e.name.clone(),
            dataset_id: e.dataset_id.clone(),
            solution_id: e.solution_id.clone(),
            matches: e.matches.len(),
            original_matches: e.matches.iter().filter(|m| m.is_original).count(),
            has_similarities: e.has_similarities(),
            default_threshold: e.default_threshold(),
            soft_kpis: e.soft_kpis.clone(),
            content_hash: e.content_hash.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetFilter {
    pub dataset: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionCreate {
    pub name: String,
    #[serde(default)]
    pub soft_kpis: SolutionKpis,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionUpdate {
    pub soft_kpis: SolutionKpis,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PageQuery {
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Page<T> {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub items: Vec<T>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExportQuery {
    #[serde(default = "default_id_column")]
    pub id_column: String,
    pub separator: Option<String>,
}

// ---- evaluation types ----

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairRequest {
    pub experiment: String,
    pub gold: String,
    /// Only matches with at least this similarity count; unscored matches always do.
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfusionResponse {
    pub experiment: String,
    pub gold: String,
    pub threshold: Option<f64>,
    pub matrix: ConfusionMatrix,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsResponse {
    pub experiment: String,
    pub gold: String,
    pub threshold: Option<f64>,
    pub matrix: ConfusionMatrix,
    pub pair_metrics: Vec<Metric>,
    pub cluster_metrics: Vec<Metric>,
    /// Pairs the closure adds to the experiment's original matches.
    pub closure_deficiency: u64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_x() -> PairMetric {
    PairMetric::Precision
}
fn default_y() -> PairMetric {
    PairMetric::Recall
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramRequest {
    pub experiment: String,
    pub gold: String,
    #[serde(default = "default_x")]
    pub x: PairMetric,
    #[serde(default = "default_y")]
    pub y: PairMetric,
    #[serde(default = "default_samples", alias = "s")]
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramResponse {
    pub experiment: String,
    pub gold: String,
    pub x: PairMetric,
    pub y: PairMetric,
    pub samples: usize,
    pub cached: bool,
    pub points: Vec<DiagramPoint>,
}

fn default_f1() -> PairMetric {
    PairMetric::F1
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EffortDiagramRequest {
    pub gold: String,
    /// Defaults to every experiment on the gold standard's dataset.
    pub experiments: Option<Vec<String>>,
    #[serde(default = "default_f1")]
    pub metric: PairMetric,
    #[serde(default = "yes")]
    pub running_max: bool,
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VennRequest {
    pub sources: Vec<String>,
    #[serde(default)]
    pub pair_mode: PairMode,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceInfo {
    pub id: String,
    pub name: String,
    pub kind: SourceKind,
}

impl SourceInfo {
    fn of(s: &PairSource) -> Self {
        SourceInfo {
            id: s.id.clone(),
            name: s.name.clone(),
            kind: s.kind,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VennResponse {
    pub sources: Vec<SourceInfo>,
    pub regions: Vec<VennRegion>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SetRequest {
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default)]
    pub pair_mode: PairMode,
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

/// Members of a set expression as native record-id pairs.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SetMembers {
    pub count: usize,
    pub pairs: Vec<[String; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Strategy {
    AroundThreshold,
    Outliers,
    Representatives,
    Sorted,
}

fn default_k() -> usize {
    10
}
fn default_partitions() -> usize {
    5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectRequest {
    pub experiment: String,
    pub gold: Option<String>,
    pub strategy: Strategy,
    /// Defaults to the experiment's lowest original similarity.
    pub threshold: Option<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    pub proportion: Option<f64>,
    #[serde(default)]
    pub side: OutlierSide,
    #[serde(default = "default_partitions")]
    pub partitions: usize,
    #[serde(default = "default_partitions")]
    pub per_partition: usize,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sort_key: SortKey,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub pair_mode: PairMode,
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionView {
    pub range: [f64; 2],
    pub size: usize,
    pub matrix: Option<ConfusionMatrix>,
    pub pairs: Vec<PairView>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "strategy", rename_all = "camelCase")]
pub enum SelectResponse {
    AroundThreshold { threshold: f64, pairs: Vec<PairView> },
    Outliers { threshold: f64, pairs: Vec<PairView> },
    Representatives { threshold: f64, partitions: Vec<PartitionView> },
    Sorted { page: Page<PairView> },
}

fn default_q() -> f64 {
    2.0
}
fn default_cap() -> usize {
    DEFAULT_CANDIDATE_CAP
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplainRequest {
    pub experiment: String,
    pub gold: String,
    /// Native record ids of the misclassified pair.
    pub pair: [String; 2],
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplainResponse {
    pub misclassified: PairView,
    pub candidate: PairView,
    pub explanation: Explanation,
    pub candidates_considered: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioRequest {
    pub experiment: String,
    pub gold: String,
    #[serde(default)]
    pub universe: PairUniverse,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileRequest {
    pub dataset: String,
    pub gold: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileView {
    pub dataset: String,
    pub sparsity: f64,
    pub textuality: f64,
    pub tuple_count: usize,
    pub positive_ratio: Option<f64>,
    pub vocabulary_size: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RankRequest {
    pub target: String,
    /// Defaults to every other dataset.
    pub candidates: Option<Vec<String>>,
    #[serde(default)]
    pub weights: Weights,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MajorityVoteRequest {
    pub experiments: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MajorityVoteRow {
    pub experiment: String,
    pub deviation: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionMatrixRequest {
    pub gold: String,
    /// Defaults to every solution.
    pub solutions: Option<Vec<String>>,
    #[serde(default)]
    pub selection: MetricSelection,
    #[serde(default)]
    pub rate: Rates,
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateRequest {
    pub gold: String,
    pub solutions: Option<Vec<String>>,
    #[serde(default = "default_f1")]
    pub best_by: PairMetric,
    pub threshold: Option<f64>,
    pub aggregation: Aggregation,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateRow {
    pub rank: usize,
    pub solution_id: String,
    pub solution_name: String,
    pub score: f64,
}

// ---- helpers ----

fn paginate<T>(items: Vec<T>, page: Option<usize>, page_size: Option<usize>, default_size: usize) -> Result<Page<T>> {
    let page = page.unwrap_or(0);
    let page_size = page_size.unwrap_or(default_size);
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(Error::InvalidArgument(format!(
            "pageSize must lie in 1..={MAX_PAGE_SIZE}, got {page_size}"
        )));
    }
    let total = items.len();
    let start = page.saturating_mul(page_size).min(total);
    let end = start.saturating_add(page_size).min(total);
    Ok(Page {
        total,
        page,
        page_size,
        items: items.into_iter().skip(start).take(end - start).collect(),
    })
}

fn check_threshold(threshold: Option<f64>) -> Result<()> {
    match threshold {
        Some(t) if !t.is_finite() => Err(Error::InvalidArgument(format!("threshold must be finite, got {t}"))),
        _ => Ok(()),
    }
}

/// Closure of the matches reaching `threshold` (all matches without one).
fn clustering_at(e: &Experiment, record_count: usize, threshold: Option<f64>) -> Clustering {
    Clustering::from_pairs(
        record_count,
        e.matches
            .iter()
            .filter(|m| match (threshold, m.similarity) {
                (Some(t), Some(s)) => s >= t,
                _ => true,
            })
            .map(|m| m.pair),
    )
}

fn same_dataset(e: &Experiment, g: &GoldStandard) -> Result<()> {
    if e.dataset_id == g.dataset_id {
        Ok(())
    } else {
        Err(Error::MixedDatasets)
    }
}

fn native_pair(dataset: &Dataset, ids: &[String; 2]) -> Result<Pair> {
    let a = dataset.require_dense_id(&ids[0])?;
    let b = dataset.require_dense_id(&ids[1])?;
    Pair::new(a, b).ok_or_else(|| Error::SelfPair(ids[0].clone()))
}

fn native_ids(dataset: &Dataset, pair: Pair) -> [String; 2] {
    [
        dataset.native_id(pair.low()).to_owned(),
        dataset.native_id(pair.high()).to_owned(),
    ]
}

impl Service {
    pub fn new(store: Store, page_size: usize) -> Self {
        Service {
            store: RwLock::new(store),
            sequences: Mutex::new(HashMap::new()),
            page_size: page_size.clamp(1, MAX_PAGE_SIZE),
        }
    }

    pub fn open(data_dir: &Path, page_size: usize) -> Result<Self> {
        Ok(Service::new(Store::open(data_dir)?, page_size))
    }

    fn read(&self) -> RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }

    fn cache(&self) -> MutexGuard<'_, HashMap<SequenceKey, Sequence>> {
        self.sequences.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn forget(&self, content_hash: &str) {
        self.cache().retain(|(e, g, _), _| e != content_hash && g != content_hash);
    }

    pub fn cached_sequences(&self) -> usize {
        self.cache().len()
    }

    // ---- datasets ----

    pub fn list_datasets(&self) -> Vec<DatasetSummary> {
        self.read().datasets().map(DatasetSummary::of).collect()
    }

    pub fn get_dataset(&self, key: &str) -> Result<DatasetSummary> {
        self.read().dataset(key).map(DatasetSummary::of)
    }

    pub fn dataset_records(&self, key: &str, q: PageQuery) -> Result<Page<RecordView>> {
        let store = self.read();
        let d = store.dataset(key)?;
        let ids: Vec<usize> = (0..d.len()).collect();
        let page = paginate(ids, q.page, q.page_size, self.page_size)?;
        Ok(Page {
            total: page.total,
            page: page.page,
            page_size: page.page_size,
            items: page.items.into_iter().map(|r| RecordView::of(d, r)).collect(),
        })
    }

    pub fn export_dataset(&self, key: &str, q: &ExportQuery) -> Result<Vec<u8>> {
        let separator = single_char(&q.separator, "separator")?.unwrap_or(',');
        let separator = u8::try_from(u32::from(separator))
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::InvalidArgument("separator must be ASCII".into()))?;
        let mut out = Vec::new();
        self.read().export_dataset(key, &mut out, &q.id_column, separator)?;
        Ok(out)
    }

    pub fn import_dataset(&self, upload: &DatasetUpload, body: &[u8]) -> Result<DatasetSummary> {
        let spec = upload.csv.apply(ImportSpec::dataset(&upload.id_column))?;
        self.write().import_dataset(&upload.name, body, &spec).map(DatasetSummary::of)
    }

    pub fn delete_dataset(&self, key: &str) -> Result<()> {
        let mut store = self.write();
        let id = store.dataset(key)?.id.clone();
        let hashes: Vec<String> = store
            .experiments()
            .filter(|e| e.dataset_id == id)
            .map(|e| e.content_hash.clone())
            .chain(store.gold_standards().filter(|g| g.dataset_id == id).map(|g| g.content_hash.clone()))
            .collect();
        store.delete_dataset(&id)?;
        hashes.iter().for_each(|h| self.forget(h));
        Ok(())
    }

    // ---- gold standards ----

    pub fn list_gold_standards(&self, filter: &DatasetFilter) -> Result<Vec<GoldSummary>> {
        let store = self.read();
        let dataset = filter.dataset.as_deref().map(|k| store.dataset(k)).transpose()?;
        Ok(store
            .gold_standards()
            .filter(|g| dataset.is_none_or(|d| d.id == g.dataset_id))
            .map(GoldSummary::of)
            .collect())
    }

    pub fn get_gold_standard(&self, key: &str) -> Result<GoldSummary> {
        self.read().gold_standard(key).map(GoldSummary::of)
    }

    pub fn import_gold_standard(&self, upload: &GoldUpload, body: &[u8]) -> Result<GoldSummary> {
        let spec = match upload.format {
            GoldFormat::Pairs => ImportSpec::gold_pairs(&upload.first, &upload.second),
            GoldFormat::Clusters => ImportSpec::gold_clusters(&upload.id_column, &upload.cluster_column),
        };
        let spec = upload.csv.apply(spec)?;
        self.write()
            .import_gold_standard(&upload.dataset, &upload.name, body, &spec)
            .map(GoldSummary::of)
    }

    pub fn delete_gold_standard(&self, key: &str) -> Result<()> {
        let mut store = self.write();
        let g = store.gold_standard(key)?;
        let (id, hash) = (g.id.clone(), g.content_hash.clone());
        store.delete_gold_standard(&id)?;
        self.forget(&hash);
        Ok(())
    }

    // ---- experiments ----

    pub fn list_experiments(&self, filter: &DatasetFilter) -> Result<Vec<ExperimentSummary>> {
        let store = self.read();
        let dataset = filter.dataset.as_deref().map(|k| store.dataset(k)).transpose()?;
        Ok(store
            .experiments()
            .filter(|e| dataset.is_none_or(|d| d.id == e.dataset_id))
            .map(ExperimentSummary::of)
            .collect())
    }

    pub fn get_experiment(&self, key: &str) -> Result<ExperimentSummary> {
        self.read().experiment(key).map(ExperimentSummary::of)
    }

    pub fn import_experiment(&self, upload: &ExperimentUpload, body: &[u8]) -> Result<ExperimentSummary> {
        let spec = ImportSpec::experiment(&upload.first, &upload.second, upload.similarity.as_deref());
        let spec = upload.csv.apply(spec)?;
        self.write()
            .import_experiment(&upload.dataset, &upload.name, upload.solution.as_deref(), body, &spec)
            .map(ExperimentSummary::of)
    }

    pub fn set_experiment_kpis(&self, key: &str, kpis: ExperimentKpis) -> Result<ExperimentSummary> {
        self.write().set_experiment_kpis(key, kpis).map(ExperimentSummary::of)
    }

    /// Applies an experiment KPI sheet; nothing changes unless every row is valid.
    pub fn import_experiment_kpis(&self, body: &[u8]) -> Result<Vec<ExperimentSummary>> {
        let rows = read_experiment_kpis_csv(body)?;
        let mut store = self.write();
        let ids = rows
            .iter()
            .map(|(key, _)| store.experiment(key).map(|e| e.id.clone()))
            .collect::<Result<Vec<_>>>()?;
        ids.into_iter()
            .zip(rows)
            .map(|(id, (_, kpis))| store.set_experiment_kpis(&id, kpis).map(ExperimentSummary::of))
            .collect()
    }

    pub fn delete_experiment(&self, key: &str) -> Result<()> {
        let mut store = self.write();
        let e = store.experiment(key)?;
        let (id, hash) = (e.id.clone(), e.content_hash.clone());
        store.delete_experiment(&id)?;
        self.forget(&hash);
        Ok(())
    }

    // ---- solutions ----

    pub fn list_solutions(&self) -> Vec<MatchingSolution> {
        self.read().solutions().cloned().collect()
    }

    pub fn get_solution(&self, key: &str) -> Result<MatchingSolution> {
        self.read().solution(key).cloned()
    }

    pub fn create_solution(&self, req: SolutionCreate) -> Result<MatchingSolution> {
        self.write().create_solution(&req.name, req.soft_kpis).cloned()
    }

    pub fn update_solution(&self, key: &str, req: SolutionUpdate) -> Result<MatchingSolution> {
        self.write().update_solution_kpis(key, req.soft_kpis).cloned()
    }

    /// Creates or updates one solution per row of a KPI sheet, matched by name.
    pub fn import_solutions(&self, body: &[u8]) -> Result<Vec<MatchingSolution>> {
        let rows = read_solution_kpis_csv(body)?;
        let mut store = self.write();
        rows.into_iter()
            .map(|(name, kpis)| match store.solution(&name).map(|s| s.id.clone()) {
                Ok(id) => store.update_solution_kpis(&id, kpis).cloned(),
                Err(_) => store.create_solution(&name, kpis).cloned(),
            })
            .collect()
    }

    pub fn delete_solution(&self, key: &str) -> Result<()> {
        self.write().delete_solution(key)
    }

    // ---- evaluation ----

    pub fn confusion(&self, req: &PairRequest) -> Result<ConfusionResponse> {
        check_threshold(req.threshold)?;
        let store = self.read();
        let (e, g) = (store.experiment(&req.experiment)?, store.gold_standard(&req.gold)?);
        same_dataset(e, g)?;
        let matrix = confusion_between(&clustering_at(e, g.clustering.len(), req.threshold), &g.clustering)?;
        Ok(ConfusionResponse {
            experiment: e.id.clone(),
            gold: g.id.clone(),
            threshold: req.threshold,
            matrix,
        })
    }

    pub fn metrics(&self, req: &PairRequest) -> Result<MetricsResponse> {
        check_threshold(req.threshold)?;
        let store = self.read();
        let (e, g) = (store.experiment(&req.experiment)?, store.gold_standard(&req.gold)?);
        same_dataset(e, g)?;
        let truth = &g.clustering;
        let clustering = clustering_at(e, truth.len(), req.threshold);
        let matrix = confusion_between(&clustering, truth)?;
        let cc = closest_cluster_f1::<f64>(&clustering, truth).ok();
        let cluster_metrics = vec![
            Metric::named("closestClusterPrecision", cc.map(|c| c.precision)),
            Metric::named("closestClusterRecall", cc.map(|c| c.recall)),
            Metric::named("closestClusterF1", cc.map(|c| c.f1)),
            Metric::named("variationOfInformation", variation_of_information(&clustering, truth).ok()),
            Metric::named("mergeDistance", unit_merge_distance(&clustering, truth).ok()),
        ];
        Ok(MetricsResponse {
            experiment: e.id.clone(),
            gold: g.id.clone(),
            threshold: req.threshold,
            matrix,
            pair_metrics: pair_metrics(&matrix),
            cluster_metrics,
            closure_deficiency: closure_deficiency(truth.len(), &e.original_pairs()),
        })
    }

    fn sequence(&self, e: &Experiment, g: &GoldStandard, samples: usize) -> Result<(Sequence, bool)> {
        let key = (e.content_hash.clone(), g.content_hash.clone(), samples);
        if let Some(hit) = self.cache().get(&key) {
            return Ok((hit.clone(), true));
        }
        if !e.has_similarities() {
            return Err(Error::NoSimilarities);
        }
        let plan = SamplePlan::new(&e.scored_pairs(), samples)?;
        let matrices = confusion_sequence_for_plan(g.clustering.len(), &plan, &g.clustering)?;
        let sequence: Sequence = Arc::new(
            matrices
                .into_iter()
                .enumerate()
                .map(|(i, m)| (plan.threshold(i), m))
                .collect(),
        );
        self.cache().insert(key, sequence.clone());
        Ok((sequence, false))
    }

    pub fn diagram(&self, req: &DiagramRequest) -> Result<DiagramResponse> {
        let store = self.read();
        let (e, g) = (store.experiment(&req.experiment)?, store.gold_standard(&req.gold)?);
        same_dataset(e, g)?;
        let (sequence, cached) = self.sequence(e, g, req.samples)?;
        Ok(DiagramResponse {
            experiment: e.id.clone(),
            gold: g.id.clone(),
            x: req.x,
            y: req.y,
            samples: req.samples,
            cached,
            points: sequence
                .iter()
                .map(|&(threshold, matrix)| DiagramPoint {
                    x: req.x.evaluate(&matrix),
                    y: req.y.evaluate(&matrix),
                    threshold,
                    matrix,
                })
                .collect(),
        })
    }

    pub fn effort_diagram(&self, req: &EffortDiagramRequest) -> Result<Vec<EffortSeries>> {
        check_threshold(req.threshold)?;
        let store = self.read();
        let g = store.gold_standard(&req.gold)?;
        let experiments: Vec<&Experiment> = match &req.experiments {
            Some(keys) => keys.iter().map(|k| store.experiment(k)).collect::<Result<_>>()?,
            None => store.experiments().filter(|e| e.dataset_id == g.dataset_id).collect(),
        };
        let samples = experiments
            .into_iter()
            .map(|e| {
                same_dataset(e, g)?;
                let matrix = confusion_between(&clustering_at(e, g.clustering.len(), req.threshold), &g.clustering)?;
                let series = match &e.solution_id {
                    Some(id) => store.solution(id)?.name.clone(),
                    None => "unassigned".to_owned(),
                };
                Ok(EffortSample {
                    experiment: e.id.clone(),
                    series,
                    effort: e.soft_kpis.as_ref().and_then(|k| k.setup_effort).map(|s| s.hr_amount),
                    value: req.metric.evaluate(&matrix),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        effort_metric_diagram(&samples, req.running_max)
    }

    fn sources(store: &Store, keys: &[String]) -> Result<Vec<PairSource>> {
        keys.iter()
            .map(|k| erbench_core::exploration::resolve_source(store, k))
            .collect()
    }

    pub fn venn(&self, req: &VennRequest) -> Result<VennResponse> {
        let store = self.read();
        let sources = Self::sources(&store, &req.sources)?;
        let refs: Vec<&PairSource> = sources.iter().collect();
        Ok(VennResponse {
            regions: venn_regions(&refs, req.pair_mode)?,
            sources: sources.iter().map(SourceInfo::of).collect(),
        })
    }

    fn set_pairs(store: &Store, req: &SetRequest) -> Result<(Vec<PairSource>, Vec<Pair>)> {
        if req.include.is_empty() {
            return Err(Error::EmptyInclude);
        }
        let include = Self::sources(store, &req.include)?;
        let exclude = Self::sources(store, &req.exclude)?;
        let pairs = evaluate_set_expression(
            &include.iter().collect::<Vec<_>>(),
            &exclude.iter().collect::<Vec<_>>(),
            req.pair_mode,
        )?;
        Ok((include.into_iter().chain(exclude).collect(), pairs))
    }

    pub fn set(&self, req: &SetRequest) -> Result<Page<PairView>> {
        let store = self.read();
        let (sources, pairs) = Self::set_pairs(&store, req)?;
        let dataset = store.dataset(&sources[0].dataset_id)?;
        let refs: Vec<&PairSource> = sources.iter().collect();
        let page = paginate(pairs, req.page, req.page_size, self.page_size)?;
        Ok(Page {
            total: page.total,
            page: page.page,
            page_size: page.page_size,
            items: page
                .items
                .into_iter()
                .map(|p| PairView::new(dataset, p, &refs, req.pair_mode))
                .collect(),
        })
    }

    pub fn set_members(&self, req: &SetRequest) -> Result<SetMembers> {
        let store = self.read();
        let (sources, pairs) = Self::set_pairs(&store, req)?;
        let dataset = store.dataset(&sources[0].dataset_id)?;
        Ok(SetMembers {
            count: pairs.len(),
            pairs: pairs.into_iter().map(|p| native_ids(dataset, p)).collect(),
        })
    }

    pub fn select(&self, req: &SelectRequest) -> Result<SelectResponse> {
        check_threshold(req.threshold)?;
        let store = self.read();
        let e = store.experiment(&req.experiment)?;
        let dataset = store.dataset(&e.dataset_id)?;
        let g = req.gold.as_deref().map(|k| store.gold_standard(k)).transpose()?;
        if let Some(g) = g {
            same_dataset(e, g)?;
        }
        let mut sources = vec![PairSource::from_experiment(e, dataset)];
        sources.extend(g.map(PairSource::from_gold_standard));
        let refs: Vec<&PairSource> = sources.iter().collect();
        let view = |p: &ScoredPair| PairView::new(dataset, p.pair, &refs, req.pair_mode);
        let matches = e.scored_pairs();
        let threshold = || {
            req.threshold
                .or_else(|| e.default_threshold())
                .ok_or(Error::NoSimilarities)
        };
        let truth = g.map(|g| &g.clustering);
        Ok(match req.strategy {
            Strategy::AroundThreshold => {
                let t = threshold()?;
                let chosen = select_around_threshold(&matches, t, req.k, req.proportion)?;
                SelectResponse::AroundThreshold {
                    threshold: t,
                    pairs: chosen.iter().map(view).collect(),
                }
            }
            Strategy::Outliers => {
                let truth = truth.ok_or(Error::NoGold)?;
                let t = threshold()?;
                let chosen = select_outliers(&matches, truth, t, req.k, req.side)?;
                SelectResponse::Outliers {
                    threshold: t,
                    pairs: chosen
                        .iter()
                        .map(|(p, class)| PairView {
                            classification: Some(*class),
                            ..view(p)
                        })
                        .collect(),
                }
            }
            Strategy::Representatives => {
                let t = threshold()?;
                let partitions =
                    select_representatives(&matches, truth, t, req.partitions, req.per_partition, req.sampler, req.seed)?;
                SelectResponse::Representatives {
                    threshold: t,
                    partitions: partitions
                        .into_iter()
                        .map(|p| PartitionView {
                            range: p.range,
                            size: p.size,
                            matrix: p.matrix,
                            pairs: p.representatives.iter().map(view).collect(),
                        })
                        .collect(),
                }
            }
            Strategy::Sorted => {
                let pool: Vec<ScoredPair> = match req.pair_mode {
                    PairMode::Closure => matches,
                    PairMode::OriginalOnly => e
                        .matches
                        .iter()
                        .filter(|m| m.is_original)
                        .map(|m| ScoredPair::new(m.pair, m.similarity))
                        .collect(),
                };
                let entropy = (req.sort_key == SortKey::Entropy).then(|| ColumnEntropy::of(dataset));
                let sorted = sort_pairs(&pool, req.sort_key, req.direction, entropy.as_ref())?;
                let page = paginate(sorted, req.page, req.page_size, self.page_size)?;
                SelectResponse::Sorted {
                    page: Page {
                        total: page.total,
                        page: page.page,
                        page_size: page.page_size,
                        items: page.items.iter().map(view).collect(),
                    },
                }
            }
        })
    }

    pub fn explain_error(&self, req: &ExplainRequest) -> Result<ExplainResponse> {
        if req.cap == 0 {
            return Err(Error::InvalidArgument("cap must be at least 1".into()));
        }
        let store = self.read();
        let (e, g) = (store.experiment(&req.experiment)?, store.gold_standard(&req.gold)?);
        same_dataset(e, g)?;
        let dataset = store.dataset(&e.dataset_id)?;
        let pair = native_pair(dataset, &req.pair)?;
        let es = PairSource::from_experiment(e, dataset);
        let gs = PairSource::from_gold_standard(g);
        let (low, high) = pair.records();
        let class = Classification::of(
            es.clustering().same_cluster(low, high),
            gs.clustering().same_cluster(low, high),
        );
        if class.is_correct() {
            return Err(Error::InvalidArgument(format!(
                "pair ({}, {}) is classified correctly",
                req.pair[0], req.pair[1]
            )));
        }
        let true_positives = evaluate_set_expression(&[&es, &gs], &[], PairMode::Closure)?;
        let candidates = cap_candidates(true_positives, &ColumnEntropy::of(dataset), req.cap);
        let explanation = explain_error(pair, &candidates, |x, y| levenshtein_similarity(dataset, x, y), req.q)?;
        let refs = [&es, &gs];
        Ok(ExplainResponse {
            misclassified: PairView::new(dataset, pair, &refs, PairMode::Closure),
            candidate: PairView::new(dataset, explanation.candidate, &refs, PairMode::Closure),
            explanation,
            candidates_considered: candidates.len(),
        })
    }

    fn ratios(
        &self,
        req: &RatioRequest,
        f: fn(&Dataset, &Clustering, &Clustering, PairUniverse) -> Result<Vec<AttributeRatio>>,
    ) -> Result<Vec<AttributeRatio>> {
        let store = self.read();
        let (e, g) = (store.experiment(&req.experiment)?, store.gold_standard(&req.gold)?);
        same_dataset(e, g)?;
        let dataset = store.dataset(&e.dataset_id)?;
        f(dataset, &e.clustering(dataset.len()), &g.clustering, req.universe)
    }

    pub fn null_ratio(&self, req: &RatioRequest) -> Result<Vec<AttributeRatio>> {
        self.ratios(req, null_ratio)
    }

    pub fn equal_ratio(&self, req: &RatioRequest) -> Result<Vec<AttributeRatio>> {
        self.ratios(req, equal_ratio)
    }

    pub fn profile(&self, req: &ProfileRequest) -> Result<ProfileView> {
        let store = self.read();
        let d = store.dataset(&req.dataset)?;
        let g = req.gold.as_deref().map(|k| store.gold_standard(k)).transpose()?;
        if g.is_some_and(|g| g.dataset_id != d.id) {
            return Err(Error::MixedDatasets);
        }
        let p: Profile = profile_dataset(d, g.map(|g| &g.clustering))?;
        Ok(ProfileView {
            dataset: d.id.clone(),
            sparsity: p.sparsity,
            textuality: p.textuality,
            tuple_count: p.tuple_count,
            positive_ratio: p.positive_ratio,
            vocabulary_size: p.vocabulary.len(),
        })
    }

    /// Profile of a dataset, with the positive ratio taken from its first gold standard.
    fn default_profile(store: &Store, d: &Dataset) -> Result<Profile> {
        let gold = store.gold_standards().find(|g| g.dataset_id == d.id);
        profile_dataset(d, gold.map(|g| &g.clustering))
    }

    pub fn rank_benchmarks(&self, req: &RankRequest) -> Result<Vec<RankedDataset<f64>>> {
        let store = self.read();
        let target = store.dataset(&req.target)?;
        let candidates: Vec<&Dataset> = match &req.candidates {
            Some(keys) => keys.iter().map(|k| store.dataset(k)).collect::<Result<_>>()?,
            None => store.datasets().filter(|d| d.id != target.id).collect(),
        };
        let profiles = candidates
            .into_iter()
            .map(|d| Ok((d.name.clone(), Self::default_profile(&store, d)?)))
            .collect::<Result<Vec<_>>>()?;
        rank_benchmark_datasets(&profiles, &Self::default_profile(&store, target)?, &req.weights)
    }

    pub fn majority_vote(&self, req: &MajorityVoteRequest) -> Result<Vec<MajorityVoteRow>> {
        let store = self.read();
        let experiments = req
            .experiments
            .iter()
            .map(|k| store.experiment(k))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = experiments.first() {
            if experiments.iter().any(|e| e.dataset_id != first.dataset_id) {
                return Err(Error::MixedDatasets);
            }
        }
        let n = match experiments.first() {
            Some(e) => store.dataset(&e.dataset_id)?.len(),
            None => 0,
        };
        let clusterings: Vec<Clustering> = experiments.iter().map(|e| e.clustering(n)).collect();
        let deviations = majority_vote_deviation(&clusterings)?;
        Ok(experiments
            .iter()
            .zip(deviations)
            .map(|(e, deviation)| MajorityVoteRow {
                experiment: e.id.clone(),
                deviation,
            })
            .collect())
    }

    fn decision_rows(
        &self,
        gold: &str,
        solutions: Option<&[String]>,
        selection: &MetricSelection,
        rate: &Rates,
        threshold: Option<f64>,
    ) -> Result<Vec<DecisionRow>> {
        check_threshold(threshold)?;
        let store = self.read();
        let g = store.gold_standard(gold)?;
        let chosen: Vec<&MatchingSolution> = match solutions {
            Some(keys) => keys.iter().map(|k| store.solution(k)).collect::<Result<_>>()?,
            None => store.solutions().collect(),
        };
        let qualities = store
            .experiments()
            .filter(|e| e.dataset_id == g.dataset_id && e.solution_id.is_some())
            .map(|e| {
                let matrix = confusion_between(&clustering_at(e, g.clustering.len(), threshold), &g.clustering)?;
                let metrics: BTreeMap<PairMetric, Option<f64>> =
                    PairMetric::ALL.iter().map(|&m| (m, m.evaluate(&matrix))).collect();
                Ok(ExperimentQuality {
                    experiment_id: e.id.clone(),
                    solution_id: e.solution_id.clone(),
                    metrics,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<SolutionRef<'_>> = chosen
            .iter()
            .map(|s| SolutionRef {
                id: &s.id,
                name: &s.name,
                kpis: &s.soft_kpis,
            })
            .collect();
        Ok(decision_matrix(&refs, &qualities, selection, rate))
    }

    pub fn decision_matrix(&self, req: &DecisionMatrixRequest) -> Result<Vec<DecisionRow>> {
        self.decision_rows(&req.gold, req.solutions.as_deref(), &req.selection, &req.rate, req.threshold)
    }

    /// Aggregated scores, best first (ties by solution name).
    pub fn aggregate(&self, req: &AggregateRequest) -> Result<Vec<AggregateRow>> {
        let selection = MetricSelection {
            metrics: PairMetric::ALL.to_vec(),
            best_by: req.best_by,
        };
        let rows = self.decision_rows(
            &req.gold,
            req.solutions.as_deref(),
            &selection,
            &req.aggregation.rate,
            req.threshold,
        )?;
        let scores = aggregate(&req.aggregation, &rows)?;
        let mut out: Vec<AggregateRow> = rows
            .into_iter()
            .zip(scores)
            .map(|(r, score)| AggregateRow {
                rank: 0,
                solution_id: r.solution_id,
                solution_name: r.solution_name,
                score,
            })
            .collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.solution_name.cmp(&b.solution_name)));
        for (i, row) in out.iter_mut().enumerate() {
            row.rank = i + 1;
        }
        Ok(out)
    }
}
