//! Report assembly and rendering as aligned text, JSON or CSV.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "text" => Some(Format::Text),
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

/// Reproducibility metadata carried by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: &'static str,
    pub seed: u64,
    /// `k` as given on the command line.
    pub k: String,
    pub k_value: f64,
    pub input_digest: String,
    pub support: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub title: Option<String>,
    /// Omitted from text output (bulky tables meant for CSV).
    pub csv_only: bool,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn text(&self, digits: usize) -> String {
        match self {
            Cell::Num(v) if *v != 0.0 && v.abs() < 0.5 * 10f64.powi(-(digits as i32)) => {
                let d = digits.saturating_sub(1);
                format!("{v:.d$e}")
            }
            Cell::Num(v) => format!("{v:.digits$}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "-".into(),
        }
    }

    fn full(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Missing => String::new(),
            other => other.text(0),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            title: None,
            csv_only: false,
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn titled(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn csv_only(mut self) -> Self {
        self.csv_only = true;
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    /// Square matrix with labelled rows and columns.
    pub fn matrix(title: &str, labels: &[String], m: &[Vec<f64>]) -> Self {
        let mut t = Table::new(std::iter::once(String::new()).chain(labels.iter().cloned())).titled(title);
        for (label, row) in labels.iter().zip(m) {
            t.push(std::iter::once(Cell::Text(label.clone())).chain(row.iter().map(|&v| Cell::Num(v))).collect());
        }
        t
    }

    fn render_text(&self, digits: usize, out: &mut String) {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| c.text(digits)).collect()).collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r.get(j).map_or(0, String::len))
                    .chain([self.headers[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        if let Some(title) = &self.title {
            let _ = writeln!(out, "{title}");
        }
        let line = |fields: &[String]| {
            fields
                .iter()
                .zip(&widths)
                .map(|(f, &w)| format!("{f:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", line(&self.headers));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r));
        }
    }
}

/// A finished command result.
#[derive(Debug, Clone)]
pub struct Report {
    pub meta: Meta,
    pub result: Value,
    pub tables: Vec<Table>,
    /// Index into `tables` of the table written in CSV mode.
    pub csv_table: usize,
    /// Decimal places used in text mode.
    pub digits: usize,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(meta: Meta, result: impl Serialize) -> Self {
        Self {
            meta,
            result: serde_json::to_value(result).expect("report values serialize"),
            tables: Vec::new(),
            csv_table: 0,
            digits: 4,
            notes: Vec::new(),
        }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "tool": "smoothq",
            "version": env!("CARGO_PKG_VERSION"),
            "meta": self.meta,
            "result": self.result,
        })
    }

    fn header_lines(&self) -> Vec<String> {
        let m = &self.meta;
        let mut lines = vec![
            format!("smoothq {} {}", env!("CARGO_PKG_VERSION"), m.command),
            format!("seed {}  k {} ({})", m.seed, m.k, m.k_value),
            format!("input {}", m.input_digest),
        ];
        if let Some(s) = &m.support {
            lines.push(format!("support {s}"));
        }
        lines
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => render_json(&self.to_json_value()),
            Format::Text => {
                let mut out = self.header_lines().join("\n");
                out.push('\n');
                for t in self.tables.iter().filter(|t| !t.csv_only) {
                    out.push('\n');
                    t.render_text(self.digits, &mut out);
                }
                if !self.notes.is_empty() {
                    out.push('\n');
                    for n in &self.notes {
                        let _ = writeln!(out, "{n}");
                    }
                }
                out
            }
            Format::Csv => {
                let mut out = String::new();
                for l in self.header_lines() {
                    let _ = writeln!(out, "# {l}");
                }
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                if let Some(t) = self.tables.get(self.csv_table) {
                    w.write_record(&t.headers).expect("in-memory write");
                    for r in &t.rows {
                        w.write_record(r.iter().map(Cell::full)).expect("in-memory write");
                    }
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
                out
            }
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
