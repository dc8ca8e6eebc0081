//! CSV tables with fixed formatting, and the files a run produces.

use std::path::Path;

use crate::error::{Error, Result};

/// Scientific notation with 13 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_ERROR: &str = "error";

/// A CSV table whose last two columns are `status` and `message`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    failures: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut header: Vec<String> = columns.iter().map(|s| s.to_string()).collect();
        header.push("status".into());
        header.push("message".into());
        Self {
            header,
            rows: Vec::new(),
            failures: 0,
        }
    }

    fn width(&self) -> usize {
        self.header.len() - 2
    }

    /// A successful row. Any non-finite number turns it into an error row.
    pub fn push(&mut self, cells: Vec<Cell>, message: &str) {
        assert_eq!(cells.len(), self.width(), "row width");
        if let Some(k) = cells.iter().position(|c| matches!(c, Cell::Num(x) if !x.is_finite())) {
            let inputs = cells.iter().take_while(|c| !matches!(c, Cell::Num(_))).count();
            let head = cells.into_iter().take(inputs.min(k)).collect();
            self.push_error(head, &format!("non-finite value in column `{}`", self.header[k]));
            return;
        }
        let mut row: Vec<String> = cells.into_iter().map(Cell::render).collect();
        row.push(STATUS_OK.into());
        row.push(message.into());
        self.rows.push(row);
    }

    /// An error row: the given leading cells, the rest empty.
    pub fn push_error(&mut self, head: Vec<Cell>, message: &str) {
        let mut row: Vec<String> = head.into_iter().map(Cell::render).collect();
        row.resize(self.width(), String::new());
        row.push(STATUS_ERROR.into());
        row.push(message.replace('\n', " "));
        self.rows.push(row);
        self.failures += 1;
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Num(x) => num(x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s,
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Builds a `Vec<Cell>` from mixed values.
#[macro_export]
#[doc(hidden)]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$($crate::cli::output::Cell::from($x)),*] };
}

/// Files of one run, kept in memory until the whole run has finished.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub failures: usize,
    pub summary: Vec<String>,
}

impl Artifacts {
    pub fn add_table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.failures += table.failures();
        self.files.push((name.to_string(), table.to_csv()?));
        Ok(())
    }

    pub fn add_file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    }
}
