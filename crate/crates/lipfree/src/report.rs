//! Gallery reports: named assertions with provenance, rendered as JSON,
//! plain text or CSV.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// A constant or claim taken from the source argument.
    #[serde(rename = "PAPER")]
    Paper,
    #[serde(rename = "TRIVIAL")]
    Trivial,
    /// Computed by an independent oracle.
    #[serde(rename = "DERIVED")]
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded without a pass/fail judgement.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub status: Status,
    pub value: String,
    pub constant: String,
    pub tag: Provenance,
}

impl Assertion {
    pub fn check(
        name: impl Into<String>,
        ok: bool,
        value: impl Into<String>,
        constant: impl Into<String>,
        tag: Provenance,
    ) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value: value.into(),
            constant: constant.into(),
            tag,
        }
    }

    pub fn info(name: impl Into<String>, value: impl Into<String>, tag: Provenance) -> Self {
        Self {
            name: name.into(),
            status: Status::Info,
            value: value.into(),
            constant: String::new(),
            tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GalleryReport {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub assertions: Vec<Assertion>,
    /// Exact values compared against the checked-in regression fixtures.
    pub frozen: BTreeMap<String, String>,
}

impl GalleryReport {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            params: BTreeMap::new(),
            assertions: Vec::new(),
            frozen: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, a: Assertion) -> &mut Self {
        self.assertions.push(a);
        self
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| a.status == Status::Fail)
    }

    pub fn find(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.id);
        for (k, v) in &self.params {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        let w = self
            .assertions
            .iter()
            .map(|a| a.name.len())
            .max()
            .unwrap_or(0);
        for a in &self.assertions {
            let status = match a.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "info",
            };
            let tag = match a.tag {
                Provenance::Paper => "PAPER",
                Provenance::Trivial => "TRIVIAL",
                Provenance::Derived => "DERIVED",
            };
            out.push_str(&format!(
                "{status}  {:<w$}  {:<7}  {}",
                a.name, tag, a.value
            ));
            if !a.constant.is_empty() {
                out.push_str(&format!("  (vs {})", a.constant));
            }
            out.push('\n');
        }
        for (k, v) in &self.frozen {
            out.push_str(&format!("frozen  {k} = {v}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "name", "status", "value", "constant", "tag"])?;
        for a in &self.assertions {
            let status = serde_json::to_value(a.status).expect("status serializes");
            let tag = serde_json::to_value(a.tag).expect("tag serializes");
            w.write_record([
                self.id.as_str(),
                a.name.as_str(),
                status.as_str().unwrap_or_default(),
                a.value.as_str(),
                a.constant.as_str(),
                tag.as_str().unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
