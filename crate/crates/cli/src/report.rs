use std::time::Duration;

use cbe_core::instances::io::market_to_string;
use cbe_core::market::Market;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// What a command produced: a JSON report, or raw text such as a generated market.
pub enum Output {
    Report(Report),
    Raw(String),
}

impl Output {
    /// Text to emit and whether the command passed.
    pub fn render(self, argv: &[String], timing: Option<Duration>) -> (String, bool) {
        match self {
            Output::Raw(s) => (s, true),
            Output::Report(r) => {
                let pass = r.pass;
                let mut text = serde_json::to_string_pretty(&r.to_json(argv, timing)).expect("serializable");
                text.push('\n');
                (text, pass)
            }
        }
    }
}

pub struct Report {
    pub command: &'static str,
    pub digest: Option<String>,
    pub pass: bool,
    pub results: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report { command, digest: None, pass: true, results: Map::new() }
    }

    pub fn for_market(command: &'static str, market: &Market) -> Self {
        let mut r = Report::new(command);
        r.digest = Some(digest(market));
        r
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    /// Records a named check; any failing check fails the report.
    pub fn check(&mut self, name: &str, expected: impl Into<Value>, actual: impl Into<Value>, pass: bool) {
        self.pass &= pass;
        let checks = self.results.entry("checks").or_insert_with(|| Value::Array(Vec::new()));
        checks
            .as_array_mut()
            .unwrap()
            .push(json!({"name": name, "expected": expected.into(), "actual": actual.into(), "pass": pass}));
    }

    fn to_json(&self, argv: &[String], timing: Option<Duration>) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), json!(self.command));
        obj.insert("argv".into(), json!(argv));
        obj.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        if let Some(d) = &self.digest {
            obj.insert("instance_sha256".into(), json!(d));
        }
        obj.insert("pass".into(), json!(self.pass));
        obj.insert("results".into(), Value::Object(self.results.clone()));
        if let Some(t) = timing {
            obj.insert("timing_ms".into(), json!(t.as_secs_f64() * 1000.0));
        }
        Value::Object(obj)
    }
}

/// SHA-256 of the canonical JSON text of a market.
pub fn digest(market: &Market) -> String {
    let h = Sha256::digest(market_to_string(market).as_bytes());
    format!("{h:x}")
}
