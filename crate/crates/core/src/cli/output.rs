//! Result files. Numbers are written with 17 significant digits so rereading
//! a file gives back the exact in-memory values.

use num_complex::Complex64 as C64;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

use crate::cmt::JsaMatrix;
use crate::error::{Error, Result};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map(Cell::Num).unwrap_or(Cell::Empty)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (h, c) in self.header.iter().zip(r) {
                    m.insert(h.to_string(), c.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn render(&self, t: &Table) -> String {
        match self {
            Format::Csv => t.to_csv(),
            Format::Json => t.to_json(),
        }
    }
}

/// Output directory that remembers what it wrote.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    pub written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|source| Error::Io { path: root.display().to_string(), source })?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, stem: &str, format: Format, t: &Table) -> Result<()> {
        self.write(&format!("{stem}.{}", format.ext()), &format.render(t))
    }
}

fn axis_line(label: &str, axis: &[f64]) -> String {
    let hz: Vec<String> = axis.iter().map(|w| num(w / (2.0 * std::f64::consts::PI))).collect();
    format!("{label}: {}\n", hz.join(" "))
}

/// Line 1 "ws_hz: ...", line 2 "wi_hz: ...", then one row per signal
/// frequency: intensities, or "re,im" amplitude pairs.
pub fn matrix_file(jsa: &JsaMatrix, amplitude: bool) -> String {
    let mut s = axis_line("ws_hz", &jsa.signal_axis);
    s.push_str(&axis_line("wi_hz", &jsa.idler_axis));
    for j in 0..jsa.rows() {
        let row: Vec<String> = (0..jsa.cols())
            .map(|k| {
                let v: C64 = jsa.at(j, k);
                if amplitude {
                    format!("{},{}", num(v.re), num(v.im))
                } else {
                    num(v.norm_sqr())
                }
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// gnuplot `splot` data: "ws_hz wi_hz jsi" with a blank line after each row.
pub fn plot_file(jsa: &JsaMatrix) -> String {
    let tau = 2.0 * std::f64::consts::PI;
    let mut s = String::from("# ws_hz wi_hz jsi\n");
    for j in 0..jsa.rows() {
        for k in 0..jsa.cols() {
            s.push_str(&format!(
                "{} {} {}\n",
                num(jsa.signal_axis[j] / tau),
                num(jsa.idler_axis[k] / tau),
                num(jsa.at(j, k).norm_sqr())
            ));
        }
        s.push('\n');
    }
    s
}

/// Whitespace-separated columns for gnuplot `plot`.
pub fn columns_file(header: &[&str], cols: &[&[f64]]) -> String {
    let mut s = format!("# {}\n", header.join(" "));
    let n = cols.first().map_or(0, |c| c.len());
    for i in 0..n {
        s.push_str(&cols.iter().map(|c| num(c[i])).collect::<Vec<_>>().join(" "));
        s.push('\n');
    }
    s
}

/// Signal axis, idler axis and the raw cells of each row.
pub type MatrixText = (Vec<f64>, Vec<f64>, Vec<Vec<String>>);

/// Parse a file written by [`matrix_file`] back into axes (Hz) and rows.
pub fn read_matrix(text: &str) -> Option<MatrixText> {
    let mut lines = text.lines();
    let parse_axis = |l: &str, label: &str| -> Option<Vec<f64>> {
        l.strip_prefix(label)?.split_whitespace().map(|v| v.parse().ok()).collect()
    };
    let ws = parse_axis(lines.next()?, "ws_hz:")?;
    let wi = parse_axis(lines.next()?, "wi_hz:")?;
    let rows = lines.map(|l| l.split_whitespace().map(str::to_string).collect()).collect();
    Some((ws, wi, rows))
}
