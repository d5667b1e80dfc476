//! Tabular results and their CSV and JSON renderings.

use crate::config::Format;
use serde_json::{json, Map, Value};

/// Bumped whenever a column is added, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(Option<f64>),
    Int(Option<u64>),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn num(x: f64) -> Cell {
        Cell::Num(x.is_finite().then_some(x))
    }

    pub fn opt(x: Option<f64>) -> Cell {
        Cell::Num(x.filter(|v| v.is_finite()))
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(Some(x)) => format_number(*x),
            Cell::Int(Some(n)) => n.to_string(),
            Cell::Num(None) | Cell::Int(None) => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(Some(x)) => json!(x),
            Cell::Int(Some(n)) => json!(n),
            Cell::Num(None) | Cell::Int(None) => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: &'static str,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Overall verdict, for reports.
    pub passed: Option<bool>,
}

impl Table {
    pub fn new(kind: &'static str, columns: Vec<&'static str>) -> Table {
        Table {
            kind,
            meta: vec![],
            columns,
            rows: vec![],
            passed: None,
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.kind);
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# qlaser {}\n# schema_version: {SCHEMA_VERSION}\n", self.kind);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {}\n", v.replace('\n', " ")));
        }
        if let Some(p) = self.passed {
            out.push_str(&format!("# passed: {p}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(vec![]);
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect::<Map<_, _>>(),
                )
            })
            .collect();
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let mut doc = json!({
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "meta": meta,
            "columns": self.columns,
            "rows": rows,
        });
        if let Some(p) = self.passed {
            doc["passed"] = json!(p);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("json values");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec!["x", "n", "why"]);
        t.meta("is", "40");
        t.push(vec![Cell::num(0.1), Cell::Int(Some(3)), Cell::text("")]);
        t.push(vec![Cell::num(f64::NAN), Cell::Int(None), Cell::text("a,b")]);
        t
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(700.0), "7.0000000000000000e2");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, 5e-324] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let s = sample().to_csv();
        assert_eq!(
            s,
            "# qlaser demo\n# schema_version: 1\n# is: 40\nx,n,why\n1.0000000000000001e-1,3,\n,,\"a,b\"\n"
        );
    }

    #[test]
    fn json_nulls_instead_of_nan() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["rows"][1]["x"], Value::Null);
        assert_eq!(v["rows"][0]["x"], json!(0.1));
        assert_eq!(v["schema_version"], json!(1));
        assert!(v.get("passed").is_none());
    }
}
