//! LIBSVM datasets and edge lists.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use vradmm_core::losses::SampleSet;

use crate::error::{io_err, BenchError, Result};

/// Reads a LIBSVM file: `label idx:val ...` with 1-based feature indices.
///
/// Labels drawn from `{-1, 0, +1}` are treated as binary and mapped to `±1`.
/// Anything else must be a non-negative integer class label; a file using
/// class `0` is shifted to `1..=c`.
pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<SampleSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_libsvm(BufReader::new(file), &path.display().to_string())
}

pub fn read_libsvm(reader: impl BufRead, source: &str) -> Result<SampleSet> {
    let parse_err = |line: usize, message: String| BenchError::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(io_err(source))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("label `{label_tok}` is not a number")))?;
        if !label.is_finite() {
            return Err(parse_err(lineno, format!("label `{label_tok}` is not finite")));
        }
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:value, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index `{idx}`")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based".into()));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value `{val}`")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("feature value `{val}` is not finite")));
            }
            dim = dim.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no samples".into()));
    }
    let labels = normalize_labels(labels).map_err(|m| parse_err(0, m))?;
    Ok(SampleSet::from_sparse_rows(dim.max(1), &rows, labels)?)
}

fn normalize_labels(labels: Vec<f64>) -> std::result::Result<Vec<f64>, String> {
    if labels.iter().all(|&l| l == -1.0 || l == 0.0 || l == 1.0) {
        return Ok(labels.into_iter().map(|l| if l == 1.0 { 1.0 } else { -1.0 }).collect());
    }
    if let Some(bad) = labels.iter().find(|&&l| l < 0.0 || l.trunc() != l) {
        return Err(format!("label {bad} is neither binary nor a class index"));
    }
    let shift = if labels.iter().any(|&l| l == 0.0) { 1.0 } else { 0.0 };
    Ok(labels.into_iter().map(|l| l + shift).collect())
}

/// Writes a sample set in LIBSVM format; values round-trip exactly.
pub fn write_libsvm(samples: &SampleSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let binary = samples.is_binary();
    for i in 0..samples.len() {
        let label = samples.label(i);
        if binary {
            write!(w, "{}", if label > 0.0 { "+1" } else { "-1" })
        } else {
            write!(w, "{label}")
        }
        .map_err(io_err(path))?;
        let (idx, val) = samples.row(i);
        for (j, v) in idx.iter().zip(val) {
            write!(w, " {}:{v:?}", j + 1).map_err(io_err(path))?;
        }
        writeln!(w).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads `i j` pairs (0-based), one per line. Blank lines and `#` comments
/// are skipped. Indices must be below `dim`.
pub fn parse_edge_list(path: impl AsRef<Path>, dim: usize) -> Result<Vec<(usize, usize)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_edge_list(BufReader::new(file), &path.display().to_string(), dim)
}

pub fn read_edge_list(reader: impl BufRead, source: &str, dim: usize) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let err = |message: String| BenchError::Parse {
            path: source.to_string(),
            line: lineno,
            message,
        };
        let line = line.map_err(io_err(source))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parts: Vec<&str> = body.split_whitespace().collect();
        let [a, b] = parts[..] else {
            return Err(err(format!("expected two node indices, got `{body}`")));
        };
        let i: usize = a.parse().map_err(|_| err(format!("bad node index `{a}`")))?;
        let j: usize = b.parse().map_err(|_| err(format!("bad node index `{b}`")))?;
        if i >= dim || j >= dim {
            return Err(err(format!("edge ({i}, {j}) out of range for {dim} features")));
        }
        if i == j {
            return Err(err(format!("self-loop on node {i}")));
        }
        edges.push((i, j));
    }
    Ok(edges)
}

pub fn write_edge_list(edges: &[(usize, usize)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for (i, j) in edges {
        writeln!(w, "{i} {j}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
