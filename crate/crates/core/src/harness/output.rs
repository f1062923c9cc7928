//! CSV/JSON emission and content digests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Prefix of the timestamp line that starts every emitted CSV file.
pub const TIMESTAMP_PREFIX: &str = "# generated";

/// Comma-separated table with a fixed header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Header and rows, without the timestamp line.
    pub fn body(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Full file contents with a leading timestamp comment.
    pub fn render(&self) -> String {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("{TIMESTAMP_PREFIX} {secs}\n{}", self.body())
    }
}

/// Shortest round-trip formatting of a float.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// SHA-256 of a CSV file's contents, ignoring the timestamp line.
pub fn csv_digest(text: &str) -> String {
    let mut h = Sha256::new();
    for line in text.lines().filter(|l| !l.starts_with(TIMESTAMP_PREFIX)) {
        h.update(line.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// SHA-256 over the little-endian bytes of a sequence of vectors.
pub fn sample_digest<'a>(samples: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut h = Sha256::new();
    for y in samples {
        for v in y {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(format!("JSON encoding failed: {e}")))
}

/// Reads a sample CSV with columns `index,y` (a header row is optional).
pub fn read_sample_csv(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() < 2 {
            return Err(Error::Parse(format!("record {} needs index and y columns", line + 1)));
        }
        let (Ok(i), Ok(y)) = (rec[0].parse::<usize>(), rec[rec.len() - 1].parse::<f64>()) else {
            if line == 0 {
                continue;
            }
            return Err(Error::Parse(format!("record {} is not numeric: {:?}", line + 1, rec)));
        };
        pairs.push((i, y));
    }
    pairs.sort_by_key(|p| p.0);
    for (k, (i, _)) in pairs.iter().enumerate() {
        if *i != k {
            return Err(Error::Parse(format!("sample indices must be 0..=n without gaps; missing {k}")));
        }
    }
    Ok(pairs.into_iter().map(|p| p.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_timestamp() {
        let mut t = Table::new(&["n", "mse"]);
        t.push(vec!["256".into(), fmt(0.5)]);
        let a = format!("{TIMESTAMP_PREFIX} 1\n{}", t.body());
        let b = format!("{TIMESTAMP_PREFIX} 2\n{}", t.body());
        assert_eq!(csv_digest(&a), csv_digest(&b));
        assert_ne!(csv_digest(&a), csv_digest("n,mse\n256,0.6\n"));
    }

    #[test]
    fn reads_sample_with_and_without_header() {
        assert_eq!(read_sample_csv("index,y\n0,1.5\n1,-2\n").unwrap(), vec![1.5, -2.0]);
        assert_eq!(read_sample_csv("1,-2\n0,1.5\n").unwrap(), vec![1.5, -2.0]);
        assert!(read_sample_csv("0,1\n2,3\n").is_err());
    }
}
