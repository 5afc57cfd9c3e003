//! JSON-lines check reports.

use serde::Serialize;
use serde_json::{Map, Value};

/// One check result. Serialises to a single JSON line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub check: String,
    pub group: String,
    pub window: String,
    pub variant: String,
    pub pass: bool,
    pub flags: Map<String, Value>,
    pub evidence: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_map: Option<Vec<[String; 2]>>,
}

impl Report {
    pub fn new(check: &str, group: impl Into<String>, window: impl Into<String>, variant: impl Into<String>) -> Self {
        Report {
            check: check.to_string(),
            group: group.into(),
            window: window.into(),
            variant: variant.into(),
            pass: true,
            flags: Map::new(),
            evidence: Value::Null,
            witness_map: None,
        }
    }

    /// Record a boolean flag; any false flag fails the report.
    pub fn flag(mut self, name: &str, value: bool) -> Self {
        self.pass &= value;
        self.flags.insert(name.to_string(), Value::Bool(value));
        self
    }

    pub fn evidence(mut self, evidence: Value) -> Self {
        self.evidence = evidence;
        self
    }

    pub fn witness(mut self, pairs: Vec<[String; 2]>) -> Self {
        self.witness_map = Some(pairs);
        self
    }

    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report serialises");
        s.push('\n');
        s
    }
}
