//! One CSV row per experiment trial.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

pub const HEADER: &str =
    "method,dataset,model,T,k,alpha,epsilon,drop,trial,seed,sigma,vt,et,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub method: String,
    pub dataset: String,
    pub model: String,
    #[serde(rename = "T")]
    pub queries: usize,
    pub k: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub drop: f64,
    pub trial: usize,
    pub seed: u64,
    /// Spread on the hidden graph; NaN marks a failed trial.
    pub sigma: f64,
    pub vt: usize,
    pub et: usize,
    pub wall_ms: u64,
}

impl ExperimentRecord {
    pub fn is_error(&self) -> bool {
        self.sigma.is_nan()
    }
}

/// Writes `records` as CSV. In append mode the header is only written when
/// the file is new or empty.
pub fn write_records(
    path: impl AsRef<Path>,
    records: &[ExperimentRecord],
    append: bool,
) -> Result<()> {
    let path = path.as_ref();
    let fresh = !append || std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)?;
    write_to(file, records, fresh)
}

pub fn write_to<W: Write>(out: W, records: &[ExperimentRecord], header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    if header {
        w.write_record(HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let records = r
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(records)
}
