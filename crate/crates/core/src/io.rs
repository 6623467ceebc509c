//! Point-sequence serialization.
//!
//! Two formats are supported: headerless CSV with one point per row and `d`
//! columns, and JSONL with one `{"x": [...]}` object per line. Values are
//! written with 17 significant digits so every `f64` round-trips exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSeq;

/// Formats a coordinate with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(s: &PointSeq, w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for p in s.iter() {
        wr.write_record(p.iter().map(|&v| format_f64(v)))?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads headerless CSV; every row must have the same number of columns.
pub fn read_csv<R: Read>(r: R) -> Result<PointSeq> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut data = Vec::new();
    let mut dim = None;
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        match dim {
            None => dim = Some(rec.len()),
            Some(d) if d != rec.len() => {
                return Err(Error::Parse(format!("row {} has {} columns, expected {}", line + 1, rec.len(), d)))
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: cannot parse {field:?} as a number", line + 1)))?;
            data.push(v);
        }
    }
    match dim {
        Some(d) => PointSeq::new(data, d),
        None => Err(Error::Parse("no rows in input".into())),
    }
}

#[derive(Serialize, Deserialize)]
struct JsonPoint {
    x: Vec<f64>,
}

pub fn write_jsonl<W: Write>(s: &PointSeq, mut w: W) -> Result<()> {
    for p in s.iter() {
        serde_json::to_writer(&mut w, &JsonPoint { x: p.to_vec() })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: Read>(r: R) -> Result<PointSeq> {
    let mut rows = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str::<JsonPoint>(&line)?.x);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no rows in input".into()));
    }
    PointSeq::from_rows(&rows)
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

/// Writes `s` to `path`, as JSONL when the extension is `.jsonl` and CSV otherwise.
pub fn save_points(s: &PointSeq, path: &Path) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    if is_jsonl(path) {
        write_jsonl(s, w)
    } else {
        write_csv(s, w)
    }
}

/// Reads a point sequence, choosing the format from the extension.
pub fn load_points(path: &Path) -> Result<PointSeq> {
    let f = File::open(path)?;
    if is_jsonl(path) {
        read_jsonl(f)
    } else {
        read_csv(f)
    }
}
