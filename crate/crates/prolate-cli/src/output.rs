use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{CliError, Result};

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n: serde_json::Number = fmt17(self.0).parse().map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

#[derive(Debug, Serialize)]
pub struct MatrixOut {
    pub shape: [usize; 2],
    pub data: Vec<Num>,
}

impl From<&DMatrix<f64>> for MatrixOut {
    fn from(m: &DMatrix<f64>) -> Self {
        let data = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| Num(m[(i, j)]))).collect();
        MatrixOut { shape: [m.nrows(), m.ncols()], data }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize infallibly")
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| CliError::io(path, e))
}

/// CSV text with `# key=value` header lines before the column row.
pub fn csv_with_header(meta: &[(&str, String)], columns: &[String], rows: &[Vec<String>]) -> String {
    let mut head = String::new();
    for (k, v) in meta {
        head.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8");
    head + &body
}
