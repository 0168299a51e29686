//! Tabular output shared by all commands, with CSV and JSON encodings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Num(a), Cell::Num(b)) => a == b || (a.is_nan() && b.is_nan()),
            (Cell::Text(a), Cell::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn parse_cell(s: &str) -> Cell {
    s.parse::<f64>()
        .map_or_else(|_| Cell::Text(s.to_owned()), Cell::Num)
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Header of key/value pairs followed by named tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub header: BTreeMap<String, String>,
    pub sections: Vec<Section>,
}

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Default,
    serde::Deserialize,
    serde::Serialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Document {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(serde_json::to_string_pretty(&self.to_json())? + "\n"),
        }
    }

    /// `# key = value` header lines, then each section as `## name`
    /// followed by a CSV block and a blank line.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for s in &self.sections {
            let _ = writeln!(out, "## {}", s.name);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&s.columns)?;
            for row in &s.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            out.push_str(
                &String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?)
                    .expect("utf-8"),
            );
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut doc = Document::default();
        let mut blocks: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            if let Some(name) = line.strip_prefix("## ") {
                blocks.push((name.to_owned(), String::new()));
            } else if let Some(kv) = line.strip_prefix("# ") {
                let (k, v) = kv
                    .split_once(" = ")
                    .ok_or_else(|| CliError::Parse(format!("bad header line {line:?}")))?;
                doc.header.insert(k.to_owned(), v.to_owned());
            } else if !line.is_empty() {
                let block = blocks
                    .last_mut()
                    .ok_or_else(|| CliError::Parse("data before the first section".into()))?;
                block.1.push_str(line);
                block.1.push('\n');
            }
        }
        for (name, body) in blocks {
            let mut r = csv::Reader::from_reader(body.as_bytes());
            let columns = r.headers()?.iter().map(str::to_owned).collect();
            let rows = r
                .records()
                .map(|rec| rec.map(|rec| rec.iter().map(parse_cell).collect()))
                .collect::<Result<_, _>>()?;
            doc.sections.push(Section {
                name,
                columns,
                rows,
            });
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> Value {
        let sections: Vec<Value> = self
            .sections
            .iter()
            .map(|s| {
                let rows: Vec<Value> = s
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
                    .collect();
                json!({ "name": s.name, "columns": s.columns, "rows": rows })
            })
            .collect();
        json!({ "header": self.header, "sections": sections })
    }
}
