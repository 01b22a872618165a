//! CSV and JSON writers.
//!
//! CSV reals use 17 significant digits in scientific notation, which
//! round-trips every `f64`; lines end in LF. Each row carries the run
//! parameters as trailing columns so a file is self-describing.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// A CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Real(f64),
    Count(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Count(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<Option<u64>> for Cell {
    fn from(n: Option<u64>) -> Self {
        n.map_or(Cell::Empty, Cell::Count)
    }
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Real(x) => write!(out, "{x:.16e}"),
            Cell::Count(n) => write!(out, "{n}"),
            Cell::Text(s) => write!(out, "{s}"),
            Cell::Empty => Ok(()),
        }
        .expect("writing to a String cannot fail");
    }
}

/// Table with trailing parameter columns repeated on every row.
pub struct CsvTable {
    header: Vec<String>,
    params: Vec<(String, Cell)>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&str], params: Vec<(&str, Cell)>) -> Self {
        Self {
            header: columns.iter().map(|s| s.to_string()).collect(),
            params: params.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let names = self.header.iter().chain(self.params.iter().map(|(k, _)| k));
        out.push_str(&names.cloned().collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row
                .iter()
                .chain(self.params.iter().map(|(_, v)| v))
                .enumerate()
            {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to standard output for `-`.
pub fn emit(path: &Path, text: &str) -> Result<(), CliError> {
    let io_err = |source: io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.as_os_str() == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(text.as_bytes()).map_err(io_err)?;
        stdout.flush().map_err(io_err)
    } else {
        fs::write(path, text).map_err(io_err)
    }
}
