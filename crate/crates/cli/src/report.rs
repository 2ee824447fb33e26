//! JSON reports and CSV series. Reports carry no timestamps, so equal inputs
//! give byte-identical files; run metadata goes to a separate file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Le,
    Ge,
    /// `|actual - expected| <= tol * |expected|`.
    Within,
    Between,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub expected: Value,
    pub actual: Value,
    pub tol: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn eq<T: Serialize + PartialEq>(name: impl Into<String>, expected: T, actual: T) -> Self {
        let pass = expected == actual;
        Self::build(name, Relation::Eq, json(&expected), json(&actual), None, pass)
    }

    pub fn le(name: impl Into<String>, bound: f64, actual: f64) -> Self {
        Self::build(name, Relation::Le, num(bound), num(actual), None, actual <= bound)
    }

    pub fn ge(name: impl Into<String>, bound: f64, actual: f64) -> Self {
        Self::build(name, Relation::Ge, num(bound), num(actual), None, actual >= bound)
    }

    pub fn within(name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        let pass = (actual - expected).abs() <= tol * expected.abs();
        Self::build(name, Relation::Within, num(expected), num(actual), Some(tol), pass)
    }

    pub fn between(name: impl Into<String>, lo: f64, hi: f64, actual: f64) -> Self {
        let pass = lo <= actual && actual <= hi;
        Self::build(name, Relation::Between, Value::Array(vec![num(lo), num(hi)]), num(actual), None, pass)
    }

    pub fn holds(name: impl Into<String>, actual: bool) -> Self {
        Self::eq(name, true, actual)
    }

    /// A computation that failed before it could be checked.
    pub fn error(name: impl Into<String>, message: String) -> Self {
        Self::build(name, Relation::Eq, Value::String("ok".into()), Value::String(message), None, false)
    }

    fn build(name: impl Into<String>, relation: Relation, expected: Value, actual: Value, tol: Option<f64>, pass: bool) -> Self {
        Self { name: name.into(), relation, expected, actual, tol, pass }
    }
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

// non-finite floats become strings so the JSON stays valid
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(x.to_string()))
}

/// A table of numbers for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub params: Value,
    pub checks: Vec<Check>,
    pub data_refs: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(scenario: &str, kind: &str, seed: Option<u64>, params: Value, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            kind: kind.into(),
            seed,
            params,
            checks,
            data_refs: vec![],
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

/// Writes `<name>.report.json`, one `<name>.<series>.csv` per series and
/// `<name>.meta.json`. Returns the written paths.
pub fn emit(dir: &Path, report: &mut Report, series: &[Series], format: Format) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    report.data_refs.clear();
    if format != Format::Json {
        for s in series {
            let file = format!("{}.{}.csv", report.scenario, s.name);
            let path = dir.join(&file);
            std::fs::write(&path, s.to_csv())?;
            report.data_refs.push(file);
            written.push(path);
        }
    }
    if format != Format::Csv {
        let path = dir.join(format!("{}.report.json", report.scenario));
        std::fs::write(&path, report.to_json())?;
        written.push(path);
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "scenario": report.scenario,
        "generated_unix_seconds": secs,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    let path = dir.join(format!("{}.meta.json", report.scenario));
    std::fs::write(&path, serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n")?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_has_empty_arrays() {
        let r = Report::new("x", "lott", None, Value::Null, vec![]);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["checks"], Value::Array(vec![]));
        assert_eq!(v["data_refs"], Value::Array(vec![]));
        assert_eq!(v["pass"], Value::Bool(true));
    }

    #[test]
    fn nonfinite_values_stay_valid_json() {
        let c = Check::le("gap", f64::INFINITY, 1.0);
        let s = serde_json::to_string(&c).unwrap();
        assert!(serde_json::from_str::<Value>(&s).is_ok());
    }
}
