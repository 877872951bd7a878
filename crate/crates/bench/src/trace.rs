//! Per-iteration CSV traces.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vradmm_core::admm::TraceRecord;

use crate::error::{BenchError, Result};

pub const CSV_COLUMNS: [&str; 9] = [
    "iter",
    "epoch",
    "objective",
    "aug_lagrangian",
    "residual",
    "theta",
    "stationarity",
    "ifo",
    "seconds",
];

/// One CSV row. `stationarity` is empty when it was not tracked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub iter: usize,
    pub epoch: usize,
    pub objective: f64,
    pub aug_lagrangian: f64,
    pub residual: f64,
    pub theta: f64,
    pub stationarity: Option<f64>,
    pub ifo: u64,
    pub seconds: f64,
}

impl From<&TraceRecord> for CsvRow {
    fn from(r: &TraceRecord) -> Self {
        CsvRow {
            iter: r.iter,
            epoch: r.epoch,
            objective: r.objective,
            aug_lagrangian: r.aug_lagrangian,
            residual: r.residual,
            theta: r.theta,
            stationarity: r.stationarity,
            ifo: r.ifo,
            seconds: r.seconds,
        }
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> BenchError + '_ {
    move |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the header and one row per record. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_trace_csv(records: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    // Headers are written by hand so an empty trace still gets one.
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(CSV_COLUMNS).map_err(csv_err(path))?;
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(BenchError::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}
