//! Structured analysis reports. Every number carries its provenance:
//! `exact` (rational arithmetic), `double` (floating point) or `sampled`
//! (Monte Carlo or a non-exhaustive search).

use mflab_core::{Matrix, Ratio, Scalar};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::CliError;

/// Scalars that can be written into a report.
pub trait Cell: Scalar {
    const PROVENANCE: &'static str;
    fn raw(&self) -> Value;
}

impl Cell for Ratio {
    const PROVENANCE: &'static str = "exact";
    fn raw(&self) -> Value {
        Value::String(self.to_string())
    }
}

impl Cell for f64 {
    const PROVENANCE: &'static str = "double";
    fn raw(&self) -> Value {
        json!(self)
    }
}

/// A model-field number with its provenance and, when exact, a float view.
pub fn num<S: Cell>(v: &S) -> Value {
    if S::EXACT {
        json!({ "value": v.raw(), "approx": v.to_f64(), "provenance": S::PROVENANCE })
    } else {
        json!({ "value": v.raw(), "provenance": S::PROVENANCE })
    }
}

pub fn double(v: f64) -> Value {
    json!({ "value": v, "provenance": "double" })
}

pub fn sampled(v: f64) -> Value {
    json!({ "value": v, "provenance": "sampled" })
}

pub fn vector<S: Cell>(v: &[S]) -> Value {
    Value::Array(v.iter().map(num).collect())
}

pub fn matrix<S: Cell>(m: &Matrix<S>) -> Value {
    Value::Array((0..m.rows()).map(|i| vector(m.row(i))).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub name: String,
    /// `exact`, `double`, `sampled`, or `label` for non-numeric columns.
    pub provenance: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<'a>(columns: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Table {
            columns: columns.into_iter().map(|(n, p)| Column { name: n.into(), provenance: p.into() }).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub analysis: String,
    pub inputs: Map<String, Value>,
    pub verdicts: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(analysis: &str, inputs: Map<String, Value>) -> Self {
        Report { analysis: analysis.into(), inputs, verdicts: Map::new(), table: None }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.verdicts.insert(key.into(), value);
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reports serialize");
        out.push('\n');
        out
    }

    /// The report's table; exact cells are written as fractions.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| CliError::Input(format!("`{}` produces no table; use --format json", self.analysis)))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Input(e.to_string());
        w.write_record(table.columns.iter().map(|c| c.name.as_str())).map_err(io)?;
        for row in &table.rows {
            w.write_record(row.iter().map(plain)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Object(o) => o.get("value").map(plain).unwrap_or_default(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mflab_core::scalar::ratio;

    #[test]
    fn numbers_carry_provenance() {
        assert_eq!(num(&ratio(1, 3))["value"], "1/3");
        assert_eq!(num(&ratio(1, 3))["provenance"], "exact");
        assert_eq!(num(&0.25f64)["provenance"], "double");
        assert_eq!(sampled(0.5)["provenance"], "sampled");
        assert!(num(&f64::NAN)["value"].is_null());
    }

    #[test]
    fn csv_uses_plain_values() {
        let mut r = Report::new("gfun", Map::new());
        let mut t = Table::new([("n", "label"), ("g", "exact")]);
        t.push(vec![json!(1), num(&ratio(1, 2))]);
        r.table = Some(t);
        assert_eq!(r.to_csv().unwrap(), "n,g\n1,1/2\n");
        r.table = None;
        assert!(r.to_csv().is_err());
    }
}
