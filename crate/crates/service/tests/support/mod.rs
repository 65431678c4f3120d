//! Helpers for driving the `erbench` binary: a served instance with a
//! recording HTTP client, and one-shot CLI runs.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Output, Stdio};

use reqwest::blocking::Client;
use serde_json::Value;
use tempfile::TempDir;

pub fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_erbench")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture exists")
}

/// Runs the CLI against `data_dir`.
pub fn cli(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(binary())
        .arg("--data-dir")
        .arg(data_dir)
        .args(args)
        .env_remove("ERBENCH_DATA_DIR")
        .env_remove("ERBENCH_PORT")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A service started with `erbench serve --port 0` on a fresh data directory.
pub struct Server {
    child: Child,
    _stdout: BufReader<ChildStdout>,
    pub base: String,
    pub data_dir: TempDir,
}

impl Server {
    pub fn start() -> Self {
        Self::start_with(&[])
    }

    pub fn start_with(extra: &[&str]) -> Self {
        let data_dir = tempfile::tempdir().expect("temp dir");
        let mut child = Command::new(binary())
            .arg("--data-dir")
            .arg(data_dir.path())
            .args(["serve", "--port", "0"])
            .args(extra)
            .env_remove("ERBENCH_PORT")
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .expect("server starts");
        let mut reader = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut line = String::new();
        reader.read_line(&mut line).expect("server announces its address");
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected first line `{line}`"))
            .to_owned();
        Server {
            child,
            _stdout: reader,
            base,
            data_dir,
        }
    }

    pub fn client(&self) -> Api {
        Api {
            base: self.base.clone(),
            http: Client::new(),
            seen: RefCell::new(BTreeSet::new()),
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub enum Body {
    None,
    Json(Value),
    Csv(String),
}

#[derive(Debug)]
pub struct Reply {
    pub status: u16,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("body is not JSON ({e}): {}", self.text))
    }

    pub fn error_code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_owned()
    }
}

/// HTTP client that remembers which route templates it called.
pub struct Api {
    pub base: String,
    http: Client,
    pub seen: RefCell<BTreeSet<(String, String)>>,
}

impl Api {
    pub fn call(&self, method: &str, template: &str, id: Option<&str>, query: &[(&str, &str)], body: Body) -> Reply {
        self.seen.borrow_mut().insert((method.to_owned(), template.to_owned()));
        let path = match id {
            Some(id) => template.replace("{id}", id),
            None => template.to_owned(),
        };
        let url = format!("{}{}", self.base, path);
        let m = reqwest::Method::from_bytes(method.to_ascii_uppercase().as_bytes()).expect("method");
        let mut req = self.http.request(m, &url).query(query);
        req = match body {
            Body::None => req,
            Body::Json(v) => req.json(&v),
            Body::Csv(text) => req.header("content-type", "text/csv").body(text),
        };
        let resp = req.send().unwrap_or_else(|e| panic!("{method} {url}: {e}"));
        Reply {
            status: resp.status().as_u16(),
            text: resp.text().expect("body"),
        }
    }

    pub fn get(&self, template: &str, id: Option<&str>, query: &[(&str, &str)]) -> Reply {
        self.call("get", template, id, query, Body::None)
    }

    pub fn post(&self, template: &str, body: Value) -> Reply {
        self.call("post", template, None, &[], Body::Json(body))
    }

    pub fn upload(&self, template: &str, query: &[(&str, &str)], csv: String) -> Reply {
        self.call("post", template, None, query, Body::Csv(csv))
    }

    pub fn put(&self, template: &str, id: &str, body: Value) -> Reply {
        self.call("put", template, Some(id), &[], Body::Json(body))
    }

    pub fn delete(&self, template: &str, id: &str) -> Reply {
        self.call("delete", template, Some(id), &[], Body::None)
    }
}
