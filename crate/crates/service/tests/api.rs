mod support;

use std::process::Command;

use serde_json::{json, Value};
use support::{binary, cli, fixture, fixture_text, stdout, Server};

fn seed_tiny(api: &support::Api) -> (String, String) {
    assert_eq!(api.upload("/datasets", &[("name", "tiny")], fixture_text("tiny_records.csv")).status, 201);
    let gold = api.upload("/goldstandards", &[("dataset", "tiny"), ("name", "g")], fixture_text("tiny_gold.csv"));
    let run = api.upload(
        "/experiments",
        &[("dataset", "tiny"), ("name", "run"), ("similarity", "similarity")],
        fixture_text("tiny_matches.csv"),
    );
    (run.json()["id"].as_str().unwrap().into(), gold.json()["id"].as_str().unwrap().into())
}

#[test]
fn record_pages_concatenate_for_every_page_size() {
    let server = Server::start();
    let api = server.client();
    assert_eq!(api.upload("/datasets", &[("name", "products")], fixture_text("products.csv")).status, 201);
    let all = api.get("/datasets/{id}/records", Some("products"), &[("pageSize", "100")]).json();
    assert_eq!(all["total"], 12);
    for size in 1..=13 {
        let size_text = size.to_string();
        let mut items = Vec::new();
        let mut page = 0;
        loop {
            let page_text = page.to_string();
            let v = api
                .get("/datasets/{id}/records", Some("products"), &[("page", &page_text), ("pageSize", &size_text)])
                .json();
            let chunk = v["items"].as_array().unwrap().clone();
            if chunk.is_empty() {
                break;
            }
            items.extend(chunk);
            page += 1;
        }
        assert_eq!(Value::Array(items), all["items"], "page size {size}");
    }
}

#[test]
fn errors_share_one_body_shape() {
    let server = Server::start();
    let api = server.client();
    seed_tiny(&api);
    let cases = [
        (api.get("/datasets/{id}", Some("nope"), &[]), 404, "NotFound"),
        (api.upload("/datasets", &[("name", "tiny")], fixture_text("tiny_records.csv")), 409, "Conflict"),
        (api.post("/evaluate/diagram", json!({ "experiment": "run", "gold": "g", "samples": 1 })), 400, "InvalidSampleCount"),
        (api.post("/evaluate/set", json!({ "include": [] })), 422, "EmptyInclude"),
        (api.post("/evaluate/metrics", json!({ "experiment": 3 })), 400, "InvalidBody"),
        (api.get("/nowhere", None, &[]), 404, "RouteNotFound"),
    ];
    for (reply, status, code) in cases {
        assert_eq!(reply.status, status, "{}", reply.text);
        let body = reply.json();
        assert_eq!(body["code"], code, "{}", reply.text);
        assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
        assert!(body.as_object().unwrap().contains_key("detail"));
    }
}

#[test]
fn missing_upload_parameters_are_rejected() {
    let server = Server::start();
    let api = server.client();
    let r = api.upload("/datasets", &[], fixture_text("tiny_records.csv"));
    assert_eq!(r.status, 400, "{}", r.text);
    let r = api.get("/datasets/{id}/records", Some("x"), &[("page", "minus one")]);
    assert_eq!(r.status, 400, "{}", r.text);
}

#[test]
fn diagrams_are_cached_until_the_experiment_is_deleted() {
    let server = Server::start();
    let api = server.client();
    let (run, gold) = seed_tiny(&api);
    let body = json!({ "experiment": run, "gold": gold, "samples": 3 });
    let first = api.post("/evaluate/diagram", body.clone()).json();
    let second = api.post("/evaluate/diagram", body.clone()).json();
    assert_eq!(first["cached"], false);
    assert_eq!(second["cached"], true);
    assert_eq!(first["points"], second["points"]);
    // a different metric pair reuses the same matrices
    let other = api.post("/evaluate/diagram", json!({ "experiment": run, "gold": gold, "samples": 3, "x": "f1", "y": "mcc" }));
    assert_eq!(other.json()["cached"], true);
    assert_eq!(api.delete("/experiments/{id}", &run).status, 204);
    assert_eq!(api.post("/evaluate/diagram", body).status, 404);
}

#[test]
fn threshold_filters_scored_matches() {
    let server = Server::start();
    let api = server.client();
    let (run, gold) = seed_tiny(&api);
    let cell = |t: f64| api.post("/evaluate/confusion", json!({ "experiment": run, "gold": gold, "threshold": t })).json()["matrix"].clone();
    assert_eq!(cell(0.95), json!({ "tp": 0, "fp": 0, "fn": 2, "tn": 4 }));
    assert_eq!(cell(0.9), json!({ "tp": 0, "fp": 1, "fn": 2, "tn": 3 }));
    assert_eq!(cell(0.0), json!({ "tp": 2, "fp": 4, "fn": 0, "tn": 0 }));
}

#[test]
fn data_survives_a_restart() {
    let server = Server::start();
    seed_tiny(&server.client());
    let dir = server.data_dir.path().to_owned();
    let out = cli(&dir, &["evaluate", "metrics", "--experiment", "run", "--gold", "g"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["matrix"]["tp"], 2);
}

#[test]
fn cors_headers_only_when_enabled() {
    let origin = |server: &Server| {
        reqwest::blocking::Client::new()
            .get(format!("{}/health", server.base))
            .header("origin", "http://example.org")
            .send()
            .unwrap()
            .headers()
            .get("access-control-allow-origin")
            .map(|v| v.to_str().unwrap().to_owned())
    };
    assert_eq!(origin(&Server::start()), None);
    assert!(origin(&Server::start_with(&["--cors"])).is_some());
}

#[test]
fn cli_exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let records = fixture("tiny_records.csv");
    let records = records.to_str().unwrap();
    let code = |args: &[&str]| cli(d, args).status.code();
    assert_eq!(code(&["import", "dataset", "missing.csv", "--name", "x"]), Some(2));
    assert_eq!(code(&["import", "dataset", records, "--name", "tiny"]), Some(0));
    assert_eq!(code(&["import", "dataset", records, "--name", "tiny"]), Some(4));
    assert_eq!(code(&["evaluate", "metrics", "--experiment", "none", "--gold", "none"]), Some(3));
    assert_eq!(code(&["evaluate", "set", "--include", "none"]), Some(3));
    let err = cli(d, &["evaluate", "profile", "--dataset", "none"]);
    assert!(String::from_utf8_lossy(&err.stderr).starts_with("error [NotFound]"));
}

#[test]
fn bench_prints_one_row_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(
        dir.path(),
        &["bench", "--records", "2000", "--matches", "900", "-s", "10", "--naive", "--optimized"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,records,matches,samples,seconds");
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[1..].iter().any(|l| l.starts_with("naive,2000,")));
    assert!(lines[1..].iter().any(|l| l.starts_with("optimized,2000,")));
}

#[test]
fn data_dir_flag_overrides_the_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let records = fixture("tiny_records.csv");
    let run = |args: &[&str]| {
        Command::new(binary())
            .args(args)
            .env("ERBENCH_DATA_DIR", env_dir.path())
            .output()
            .unwrap()
    };
    let import = ["import", "dataset", records.to_str().unwrap(), "--name", "tiny"];
    assert!(run(&import).status.success());
    let flag = flag_dir.path().to_str().unwrap();
    let mut with_flag = vec!["--data-dir", flag];
    with_flag.extend(import);
    assert!(run(&with_flag).status.success(), "flag directory starts empty");
    // a second import into the environment directory conflicts
    assert_eq!(run(&import).status.code(), Some(4));
}

#[test]
fn csv_output_for_kpi_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = |name: &str| fixture(name).to_string_lossy().into_owned();
    let ok = |args: &[&str]| {
        let out = cli(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        stdout(&out)
    };
    ok(&["import", "dataset", &f("products.csv"), "--name", "products"]);
    ok(&["import", "gold", &f("products_gold.csv"), "--dataset", "products", "--name", "pg", "--format", "clusters"]);
    ok(&["import", "solutions", &f("solutions.csv")]);
    ok(&["import", "experiment", &f("products_rules.csv"), "--dataset", "products", "--name", "rules", "--solution", "RuleMatch", "--similarity", "similarity"]);
    ok(&["import", "experiment", &f("products_learned.csv"), "--dataset", "products", "--name", "learned", "--solution", "LearnMatch", "--similarity", "similarity"]);
    let matrix = ok(&["kpi", "matrix", "--gold", "pg", "--format", "csv"]);
    assert_eq!(matrix.lines().count(), 3, "{matrix}");
    let ranked = ok(&["kpi", "aggregate", "--gold", "pg", "--term", "metric:f1=1", "--format", "csv"]);
    assert_eq!(ranked.lines().count(), 3, "{ranked}");
    assert!(ranked.lines().nth(1).unwrap().starts_with("1,"), "{ranked}");
}
