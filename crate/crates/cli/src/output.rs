//! Artifacts: one JSON document per run plus any number of CSV tables, all
//! deterministic for a given configuration.

use std::path::Path;

use hbl_core::numerics::{Cplx, Real};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Significant digits of reported quantities.
pub const VALUE_DIGITS: usize = 30;

/// Digits that pin down a `prec`-bit binary value.
pub fn digits_for(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

pub fn num(x: &Real) -> String {
    x.to_string_digits(VALUE_DIGITS)
}

pub fn cnum(z: &Cplx) -> Value {
    serde_json::json!({ "re": num(&z.re), "im": num(&z.im) })
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Table { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let err = |e: csv::Error| CliError::io(format!("{}: {e}", self.file));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(format!("{}: {e}", self.file)))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub command: &'static str,
    /// Command results, merged into the top level of the JSON document.
    pub result: Map<String, Value>,
    pub tables: Vec<Table>,
    /// Set when the run completed but a check failed.
    pub failure: Option<CliError>,
}

impl Artifact {
    pub fn new(command: &'static str) -> Self {
        Artifact { command, result: Map::new(), tables: Vec::new(), failure: None }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.result.insert(key.into(), v.into());
    }

    pub fn document(&self, config: Option<Value>, parameters: Value) -> Value {
        let mut doc = Map::new();
        doc.insert("schema".into(), "hbl-artifact/1".into());
        doc.insert("command".into(), self.command.into());
        doc.insert("version".into(), hbl_core::VERSION.into());
        if let Some(c) = config {
            doc.insert("config".into(), c);
        }
        doc.insert("parameters".into(), parameters);
        doc.insert("tables".into(), self.tables.iter().map(|t| Value::from(t.file.clone())).collect::<Vec<_>>().into());
        for (k, v) in &self.result {
            doc.insert(k.clone(), v.clone());
        }
        Value::Object(doc)
    }

    pub fn write(&self, dir: &Path, doc: &Value) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
        };
        write(&format!("{}.json", self.command), pretty(doc))?;
        for t in &self.tables {
            write(&t.file, t.to_csv()?)?;
        }
        Ok(())
    }
}

pub fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_lf_only() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let s = t.to_csv().unwrap();
        assert_eq!(s, "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn digits_cover_precision() {
        assert_eq!(digits_for(256), 79);
        assert!(digits_for(53) >= 17);
    }

    #[test]
    fn document_lists_tables_and_version() {
        let mut a = Artifact::new("demo");
        a.set("k", 1);
        a.tables.push(Table::new("demo.csv", &["x"]));
        let doc = a.document(None, serde_json::json!({}));
        assert_eq!(doc["tables"][0], "demo.csv");
        assert_eq!(doc["version"], hbl_core::VERSION);
        assert_eq!(doc["k"], 1);
    }
}
