//! HTTP routes; each handler delegates to one [`Service`] operation.

use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::IntoResponse;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

use crate::error::ApiError;
use crate::ops::*;
use crate::openapi;

type Shared = Arc<Service>;
type ApiResult<T> = Result<T, ApiError>;
type JsonBody<T> = Result<Json<T>, JsonRejection>;
type QueryParams<T> = Result<Query<T>, QueryRejection>;

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    /// Bind every interface instead of localhost only.
    pub public: bool,
    pub cors: bool,
    pub page_size: usize,
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> erbench_core::Result<T> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: crate::error::ErrorBody {
                code: "InternalError".into(),
                message: e.to_string(),
                detail: Value::Null,
            },
        }),
    }
}

fn json_body<T>(body: JsonBody<T>) -> ApiResult<T> {
    body.map(|Json(t)| t)
        .map_err(|e| ApiError::bad_request("InvalidBody", e.body_text()))
}

fn query<T>(params: QueryParams<T>) -> ApiResult<T> {
    params
        .map(|Query(t)| t)
        .map_err(|e| ApiError::bad_request("InvalidQuery", e.body_text()))
}

async fn evaluate<Req, Resp>(
    s: Shared,
    req: Req,
    op: fn(&Service, &Req) -> erbench_core::Result<Resp>,
) -> ApiResult<Json<Resp>>
where
    Req: Send + 'static,
    Resp: Send + 'static,
{
    Ok(Json(blocking(move || op(&s, &req)).await?))
}

macro_rules! evaluation {
    ($handler:ident, $req:ty, $resp:ty, $op:path) => {
        async fn $handler(State(s): State<Shared>, body: JsonBody<$req>) -> ApiResult<Json<$resp>> {
            evaluate(s, json_body(body)?, $op).await
        }
    };
}

evaluation!(confusion, PairRequest, ConfusionResponse, Service::confusion);
evaluation!(metrics, PairRequest, MetricsResponse, Service::metrics);
evaluation!(diagram_post, DiagramRequest, DiagramResponse, Service::diagram);
evaluation!(effort_diagram, EffortDiagramRequest, Vec<erbench_core::exploration::EffortSeries>, Service::effort_diagram);
evaluation!(venn, VennRequest, VennResponse, Service::venn);
evaluation!(set, SetRequest, Page<erbench_core::exploration::PairView>, Service::set);
evaluation!(select, SelectRequest, SelectResponse, Service::select);
evaluation!(explain_error, ExplainRequest, ExplainResponse, Service::explain_error);
evaluation!(null_ratio, RatioRequest, Vec<erbench_core::exploration::AttributeRatio>, Service::null_ratio);
evaluation!(equal_ratio, RatioRequest, Vec<erbench_core::exploration::AttributeRatio>, Service::equal_ratio);
evaluation!(profile, ProfileRequest, ProfileView, Service::profile);
evaluation!(rank_benchmarks, RankRequest, Vec<erbench_core::metrics::RankedDataset<f64>>, Service::rank_benchmarks);
evaluation!(majority_vote, MajorityVoteRequest, Vec<MajorityVoteRow>, Service::majority_vote);
evaluation!(decision_matrix, DecisionMatrixRequest, Vec<erbench_core::softkpi::DecisionRow>, Service::decision_matrix);
evaluation!(aggregate, AggregateRequest, Vec<AggregateRow>, Service::aggregate);

async fn diagram_get(State(s): State<Shared>, params: QueryParams<DiagramRequest>) -> ApiResult<Json<DiagramResponse>> {
    evaluate(s, query(params)?, Service::diagram).await
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn openapi_document() -> Json<Value> {
    Json(openapi::document())
}

async fn fallback(uri: Uri) -> ApiError {
    ApiError::route_not_found(uri.path())
}

fn created<T>(value: T) -> (StatusCode, Json<T>) {
    (StatusCode::CREATED, Json(value))
}

// ---- datasets ----

async fn list_datasets(State(s): State<Shared>) -> Json<Vec<DatasetSummary>> {
    Json(s.list_datasets())
}

async fn upload_dataset(
    State(s): State<Shared>,
    params: QueryParams<DatasetUpload>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<DatasetSummary>)> {
    let upload = query(params)?;
    blocking(move || s.import_dataset(&upload, &body)).await.map(created)
}

async fn get_dataset(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<DatasetSummary>> {
    Ok(Json(blocking(move || s.get_dataset(&id)).await?))
}

async fn delete_dataset(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || s.delete_dataset(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn dataset_records(
    State(s): State<Shared>,
    Path(id): Path<String>,
    params: QueryParams<PageQuery>,
) -> ApiResult<Json<Page<erbench_core::exploration::RecordView>>> {
    let q = query(params)?;
    Ok(Json(blocking(move || s.dataset_records(&id, q)).await?))
}

async fn export_dataset(
    State(s): State<Shared>,
    Path(id): Path<String>,
    params: QueryParams<ExportQuery>,
) -> ApiResult<impl IntoResponse> {
    let q = query(params)?;
    let csv = blocking(move || s.export_dataset(&id, &q)).await?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv))
}

// ---- gold standards ----

async fn list_gold_standards(
    State(s): State<Shared>,
    params: QueryParams<DatasetFilter>,
) -> ApiResult<Json<Vec<GoldSummary>>> {
    let filter = query(params)?;
    Ok(Json(blocking(move || s.list_gold_standards(&filter)).await?))
}

async fn upload_gold_standard(
    State(s): State<Shared>,
    params: QueryParams<GoldUpload>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<GoldSummary>)> {
    let upload = query(params)?;
    blocking(move || s.import_gold_standard(&upload, &body)).await.map(created)
}

async fn get_gold_standard(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<GoldSummary>> {
    Ok(Json(blocking(move || s.get_gold_standard(&id)).await?))
}

async fn delete_gold_standard(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || s.delete_gold_standard(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

// ---- experiments ----

async fn list_experiments(
    State(s): State<Shared>,
    params: QueryParams<DatasetFilter>,
) -> ApiResult<Json<Vec<ExperimentSummary>>> {
    let filter = query(params)?;
    Ok(Json(blocking(move || s.list_experiments(&filter)).await?))
}

async fn upload_experiment(
    State(s): State<Shared>,
    params: QueryParams<ExperimentUpload>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<ExperimentSummary>)> {
    let upload = query(params)?;
    blocking(move || s.import_experiment(&upload, &body)).await.map(created)
}

async fn import_experiment_kpis(State(s): State<Shared>, body: Bytes) -> ApiResult<Json<Vec<ExperimentSummary>>> {
    Ok(Json(blocking(move || s.import_experiment_kpis(&body)).await?))
}

async fn get_experiment(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<ExperimentSummary>> {
    Ok(Json(blocking(move || s.get_experiment(&id)).await?))
}

async fn set_experiment_kpis(
    State(s): State<Shared>,
    Path(id): Path<String>,
    body: JsonBody<erbench_core::softkpi::ExperimentKpis>,
) -> ApiResult<Json<ExperimentSummary>> {
    let kpis = json_body(body)?;
    Ok(Json(blocking(move || s.set_experiment_kpis(&id, kpis)).await?))
}

async fn delete_experiment(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || s.delete_experiment(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

// ---- solutions ----

async fn list_solutions(State(s): State<Shared>) -> Json<Vec<erbench_core::MatchingSolution>> {
    Json(s.list_solutions())
}

async fn create_solution(
    State(s): State<Shared>,
    body: JsonBody<SolutionCreate>,
) -> ApiResult<(StatusCode, Json<erbench_core::MatchingSolution>)> {
    let req = json_body(body)?;
    blocking(move || s.create_solution(req)).await.map(created)
}

async fn import_solutions(
    State(s): State<Shared>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Vec<erbench_core::MatchingSolution>>)> {
    blocking(move || s.import_solutions(&body)).await.map(created)
}

async fn get_solution(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<erbench_core::MatchingSolution>> {
    Ok(Json(blocking(move || s.get_solution(&id)).await?))
}

async fn update_solution(
    State(s): State<Shared>,
    Path(id): Path<String>,
    body: JsonBody<SolutionUpdate>,
) -> ApiResult<Json<erbench_core::MatchingSolution>> {
    let req = json_body(body)?;
    Ok(Json(blocking(move || s.update_solution(&id, req)).await?))
}

async fn delete_solution(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || s.delete_solution(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

pub fn router(service: Shared, cors: bool) -> Router {
    let router = Router::new()
        .route("/health", get(health))
        .route("/openapi", get(openapi_document))
        .route("/datasets", get(list_datasets).post(upload_dataset))
        .route("/datasets/{id}", get(get_dataset).delete(delete_dataset))
        .route("/datasets/{id}/records", get(dataset_records))
        .route("/datasets/{id}/export", get(export_dataset))
        .route("/goldstandards", get(list_gold_standards).post(upload_gold_standard))
        .route("/goldstandards/{id}", get(get_gold_standard).delete(delete_gold_standard))
        .route("/experiments", get(list_experiments).post(upload_experiment))
        .route("/experiments/kpis", post(import_experiment_kpis))
        .route("/experiments/{id}", get(get_experiment).delete(delete_experiment))
        .route("/experiments/{id}/kpis", put(set_experiment_kpis))
        .route("/solutions", get(list_solutions).post(create_solution))
        .route("/solutions/import", post(import_solutions))
        .route("/solutions/{id}", get(get_solution).put(update_solution).delete(delete_solution))
        .route("/evaluate/confusion", post(confusion))
        .route("/evaluate/metrics", post(metrics))
        .route("/evaluate/diagram", get(diagram_get).post(diagram_post))
        .route("/evaluate/effort-diagram", post(effort_diagram))
        .route("/evaluate/venn", post(venn))
        .route("/evaluate/set", post(set))
        .route("/evaluate/select", post(select))
        .route("/evaluate/explain-error", post(explain_error))
        .route("/evaluate/null-ratio", post(null_ratio))
        .route("/evaluate/equal-ratio", post(equal_ratio))
        .route("/evaluate/profile", post(profile))
        .route("/evaluate/rank-benchmarks", post(rank_benchmarks))
        .route("/evaluate/majority-vote", post(majority_vote))
        .route("/kpi/decision-matrix", post(decision_matrix))
        .route("/kpi/aggregate", post(aggregate))
        .fallback(fallback)
        .layer(DefaultBodyLimit::disable())
        .with_state(service);
    if cors {
        router.layer(CorsLayer::permissive())
    } else {
        router
    }
}

/// Binds, prints the listening address on stdout and serves until Ctrl-C.
pub async fn serve(config: ServeConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let service = Arc::new(Service::open(&config.data_dir, config.page_size)?);
    let host = if config.public {
        Ipv4Addr::UNSPECIFIED
    } else {
        Ipv4Addr::LOCALHOST
    };
    let listener = TcpListener::bind(SocketAddr::from((host, config.port))).await?;
    println!("listening on http://{}", listener.local_addr()?);
    use std::io::Write;
    std::io::stdout().flush()?;
    axum::serve(listener, router(service, config.cors))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
