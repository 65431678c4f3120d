//! Machine-readable description of the HTTP API.

use serde_json::{json, Map, Value};

/// How a route receives its input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Input {
    None,
    Query(&'static [&'static str]),
    Json(&'static str),
    Csv(&'static [&'static str]),
}

#[derive(Clone, Copy, Debug)]
pub struct Route {
    pub method: &'static str,
    pub path: &'static str,
    pub summary: &'static str,
    pub input: Input,
}

const CSV: &[&str] = &["separator", "quote", "escape"];

macro_rules! routes {
    ($(($method:literal, $path:literal, $summary:literal, $input:expr)),+ $(,)?) => {
        &[$(Route { method: $method, path: $path, summary: $summary, input: $input }),+]
    };
}

/// Every documented route.
pub const ROUTES: &[Route] = routes![
    ("get", "/health", "Liveness probe", Input::None),
    ("get", "/openapi", "This document", Input::None),
    ("get", "/datasets", "List datasets", Input::None),
    ("post", "/datasets", "Upload a dataset CSV", Input::Csv(&["name", "idColumn"])),
    ("get", "/datasets/{id}", "Dataset summary", Input::None),
    ("delete", "/datasets/{id}", "Delete a dataset with its gold standards and experiments", Input::None),
    ("get", "/datasets/{id}/records", "Page of records", Input::Query(&["page", "pageSize"])),
    ("get", "/datasets/{id}/export", "Dataset as CSV", Input::Query(&["idColumn", "separator"])),
    ("get", "/goldstandards", "List gold standards", Input::Query(&["dataset"])),
    (
        "post",
        "/goldstandards",
        "Upload a gold standard CSV (pairs or cluster column)",
        Input::Csv(&["dataset", "name", "format", "first", "second", "idColumn", "clusterColumn"])
    ),
    ("get", "/goldstandards/{id}", "Gold standard summary", Input::None),
    ("delete", "/goldstandards/{id}", "Delete a gold standard", Input::None),
    ("get", "/experiments", "List experiments", Input::Query(&["dataset"])),
    (
        "post",
        "/experiments",
        "Upload an experiment CSV",
        Input::Csv(&["dataset", "name", "solution", "first", "second", "similarity"])
    ),
    ("post", "/experiments/kpis", "Apply an experiment KPI sheet (CSV)", Input::Csv(&[])),
    ("get", "/experiments/{id}", "Experiment summary", Input::None),
    ("delete", "/experiments/{id}", "Delete an experiment", Input::None),
    ("put", "/experiments/{id}/kpis", "Set experiment KPIs", Input::Json("ExperimentKpis")),
    ("get", "/solutions", "List matching solutions", Input::None),
    ("post", "/solutions", "Create a matching solution", Input::Json("SolutionCreate")),
    ("post", "/solutions/import", "Create or update solutions from a KPI sheet (CSV)", Input::Csv(&[])),
    ("get", "/solutions/{id}", "Matching solution", Input::None),
    ("put", "/solutions/{id}", "Replace solution KPIs", Input::Json("SolutionUpdate")),
    ("delete", "/solutions/{id}", "Delete a matching solution", Input::None),
    ("post", "/evaluate/confusion", "Confusion matrix", Input::Json("PairRequest")),
    ("post", "/evaluate/metrics", "Pair and cluster metrics", Input::Json("PairRequest")),
    (
        "get",
        "/evaluate/diagram",
        "Metric/metric diagram",
        Input::Query(&["experiment", "gold", "x", "y", "s"])
    ),
    ("post", "/evaluate/diagram", "Metric/metric diagram", Input::Json("DiagramRequest")),
    ("post", "/evaluate/effort-diagram", "Effort/metric diagram", Input::Json("EffortDiagramRequest")),
    ("post", "/evaluate/venn", "Venn regions of 2 to 4 sources", Input::Json("VennRequest")),
    ("post", "/evaluate/set", "Paginated pairs of a set expression", Input::Json("SetRequest")),
    ("post", "/evaluate/select", "Pair selection by strategy", Input::Json("SelectRequest")),
    ("post", "/evaluate/explain-error", "Closest correct pair for a misclassified pair", Input::Json("ExplainRequest")),
    ("post", "/evaluate/null-ratio", "Misclassification share among pairs with nulls", Input::Json("RatioRequest")),
    ("post", "/evaluate/equal-ratio", "Misclassification share among pairs with equal values", Input::Json("RatioRequest")),
    ("post", "/evaluate/profile", "Dataset profile", Input::Json("ProfileRequest")),
    ("post", "/evaluate/rank-benchmarks", "Datasets ranked by similarity to a target", Input::Json("RankRequest")),
    ("post", "/evaluate/majority-vote", "Deviation of each experiment from the majority", Input::Json("MajorityVoteRequest")),
    ("post", "/kpi/decision-matrix", "Decision matrix of solutions", Input::Json("DecisionMatrixRequest")),
    ("post", "/kpi/aggregate", "Aggregated solution scores", Input::Json("AggregateRequest")),
];

fn query_params(names: &[&str]) -> Vec<Value> {
    names
        .iter()
        .map(|n| json!({ "name": n, "in": "query", "schema": { "type": "string" } }))
        .collect()
}

fn operation(route: &Route) -> Value {
    let mut op = Map::new();
    op.insert("summary".into(), json!(route.summary));
    let mut params: Vec<Value> = Vec::new();
    if route.path.contains("{id}") {
        params.push(json!({ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }));
    }
    match route.input {
        Input::None => {}
        Input::Query(names) => params.extend(query_params(names)),
        Input::Json(schema) => {
            op.insert(
                "requestBody".into(),
                json!({ "required": true, "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } } }),
            );
        }
        Input::Csv(names) => {
            params.extend(query_params(names));
            params.extend(query_params(CSV));
            op.insert(
                "requestBody".into(),
                json!({ "required": true, "content": { "text/csv": { "schema": { "type": "string" } } } }),
            );
        }
    }
    if !params.is_empty() {
        op.insert("parameters".into(), Value::Array(params));
    }
    let ok = match route.method {
        "post" if matches!(route.input, Input::Csv(_)) || route.path == "/solutions" => "201",
        "delete" => "204",
        _ => "200",
    };
    op.insert(
        "responses".into(),
        json!({
            ok: { "description": "success" },
            "400": { "$ref": "#/components/responses/Error" },
            "404": { "$ref": "#/components/responses/Error" },
            "409": { "$ref": "#/components/responses/Error" },
            "422": { "$ref": "#/components/responses/Error" },
        }),
    );
    Value::Object(op)
}

pub fn document() -> Value {
    let mut paths = Map::new();
    for route in ROUTES {
        let entry = paths.entry(route.path).or_insert_with(|| Value::Object(Map::new()));
        entry
            .as_object_mut()
            .expect("path items are objects")
            .insert(route.method.into(), operation(route));
    }
    let schemas: Map<String, Value> = ROUTES
        .iter()
        .filter_map(|r| match r.input {
            Input::Json(name) => Some((name.to_owned(), json!({ "type": "object" }))),
            _ => None,
        })
        .collect();
    json!({
        "openapi": "3.0.3",
        "info": { "title": "erbench", "version": env!("CARGO_PKG_VERSION") },
        "paths": paths,
        "components": {
            "schemas": schemas,
            "responses": {
                "Error": {
                    "description": "error",
                    "content": { "application/json": { "schema": {
                        "type": "object",
                        "required": ["code", "message", "detail"],
                        "properties": {
                            "code": { "type": "string" },
                            "message": { "type": "string" },
                            "detail": {}
                        }
                    } } }
                }
            }
        }
    })
}
