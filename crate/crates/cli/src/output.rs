//! Tables and their CSV, JSON and plot-data renderings.
//!
//! Floats are written in shortest round-trip form, so a rerun with the same
//! configuration reproduces every file byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Int(i) => i as f64,
            Cell::Float(v) => v,
        }
    }

    fn csv(&self) -> String {
        match *self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => format!("{v:e}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: &str, columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }
}

/// What a command produced: tables in the chosen format, plot-data files
/// (always whitespace columns), and an optional sub-directory of the output
/// directory.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub subdir: Option<String>,
    pub tables: Vec<Table>,
    pub plots: Vec<Table>,
    /// Human-readable lines printed after the run.
    pub report: Vec<String>,
}

/// Provenance written at the top of every file.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub config: RunConfig,
    pub derived: Vec<(String, f64)>,
}

impl Header {
    fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("cqwell {}", cqwell::VERSION),
            format!("command: {}", self.command),
        ];
        let derived: Vec<String> = self
            .derived
            .iter()
            .map(|(k, v)| format!("{k} = {v:e}"))
            .collect();
        lines.push(format!("derived: {}", derived.join(", ")));
        lines.push("config:".into());
        lines.extend(self.config.to_toml().lines().map(|l| {
            if l.is_empty() {
                String::new()
            } else {
                format!("  {l}")
            }
        }));
        lines
    }

    fn write_comments(&self, s: &mut String) {
        for l in self.comment_lines() {
            if l.is_empty() {
                s.push_str("#\n");
            } else {
                writeln!(s, "# {l}").unwrap();
            }
        }
    }
}

pub fn render_csv(table: &Table, header: &Header) -> String {
    let mut s = String::new();
    header.write_comments(&mut s);
    writeln!(s, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    s
}

pub fn render_plot(table: &Table, header: &Header) -> String {
    let mut s = String::new();
    header.write_comments(&mut s);
    writeln!(s, "# {}", table.columns.join(" ")).unwrap();
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(s, "{}", cells.join(" ")).unwrap();
    }
    s
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    program: &'static str,
    version: &'static str,
    command: &'a str,
    derived: serde_json::Map<String, serde_json::Value>,
    config: &'a RunConfig,
    columns: &'a [String],
    rows: &'a [Vec<Cell>],
}

pub fn render_json(table: &Table, header: &Header) -> String {
    let derived = header
        .derived
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::json!(v)))
        .collect();
    let doc = JsonDoc {
        program: "cqwell",
        version: cqwell::VERSION,
        command: &header.command,
        derived,
        config: &header.config,
        columns: &table.columns,
        rows: &table.rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("tables always serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write every table of `out` under `dir` and return the paths written.
pub fn write_output(
    dir: &Path,
    format: Format,
    header: &Header,
    out: &Output,
) -> Result<Vec<PathBuf>, CliError> {
    let dir = match &out.subdir {
        Some(sub) => dir.join(sub),
        None => dir.to_path_buf(),
    };
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for t in &out.tables {
        let (ext, text) = match format {
            Format::Csv => ("csv", render_csv(t, header)),
            Format::Json => ("json", render_json(t, header)),
        };
        let path = dir.join(format!("{}.{ext}", t.name));
        write_file(&path, &text)?;
        written.push(path);
    }
    for t in &out.plots {
        let path = dir.join(format!("{}.dat", t.name));
        write_file(&path, &render_plot(t, header))?;
        written.push(path);
    }
    Ok(written)
}
