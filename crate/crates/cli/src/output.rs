//! Command output: an aligned text table on stdout, the same records as JSON
//! with `--json`, and CSV files with a versioned header line.

use std::path::Path;

use kinklab_core::io::{header_line, write_records};
use serde_json::{Map, Value};

/// Records produced by one subcommand.
pub struct Report {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub notes: Vec<String>,
    pub summary: Vec<(&'static str, Value)>,
}

impl Report {
    pub fn new(kind: &'static str, columns: &[&'static str]) -> Self {
        Self {
            kind,
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn set(&mut self, key: &'static str, value: impl Into<Value>) {
        self.summary.push((key, value.into()));
    }

    /// Writes the rows as CSV under a `# kinklab <kind> v1` header.
    pub fn write_csv(&self, path: &Path) -> kinklab_core::Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(csv_cell).collect())
            .collect();
        write_records(path, &header_line(self.kind, &[]), &self.columns, &rows)
    }

    pub fn print(&self, json: bool) {
        if json {
            println!("{}", self.to_json());
        } else {
            print!("{}", self.to_text());
        }
    }

    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        let mut out = Map::new();
        out.insert("kind".into(), Value::from(self.kind));
        out.insert("records".into(), Value::Array(records));
        if !summary.is_empty() {
            out.insert("summary".into(), Value::Object(summary));
        }
        if !self.notes.is_empty() {
            out.insert("notes".into(), Value::from(self.notes.clone()));
        }
        serde_json::to_string_pretty(&Value::Object(out)).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.rows.is_empty() {
            let cells: Vec<Vec<String>> = self
                .rows
                .iter()
                .map(|r| r.iter().map(text_cell).collect())
                .collect();
            let widths: Vec<usize> = (0..self.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].chars().count())
                        .chain([self.columns[j].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |fields: Vec<String>| -> String {
                let padded: Vec<String> = fields
                    .into_iter()
                    .zip(&widths)
                    .map(|(f, w)| format!("{f:<w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            out += &line(self.columns.iter().map(|c| c.to_string()).collect());
            for r in cells {
                out += &line(r);
            }
        }
        let key_width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.summary {
            out += &format!("{k:<key_width$}  {}\n", text_cell(v));
        }
        for n in &self.notes {
            out += &format!("note: {n}\n");
        }
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .map_or_else(|| n.to_string(), |f| format!("{f:?}")),
        other => other.to_string(),
    }
}

fn text_cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format_float(f),
            _ => n.to_string(),
        },
        other => csv_cell(other),
    }
}

/// Ten significant digits, scientific notation outside `[1e-4, 1e7)`.
pub fn format_float(f: f64) -> String {
    if f == 0.0 || !f.is_finite() {
        return f.to_string();
    }
    let a = f.abs();
    if (1e-4..1e7).contains(&a) {
        let decimals = (9 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{f:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{f:.9e}")
    }
}

/// JSON number, or null for NaN and infinities.
pub fn num(f: f64) -> Value {
    serde_json::Number::from_f64(f).map_or(Value::Null, Value::Number)
}
