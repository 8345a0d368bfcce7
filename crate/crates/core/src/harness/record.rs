use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column order of every experiment CSV.
pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "family",
    "n",
    "p",
    "m",
    "seed",
    "interventions",
    "expected",
    "parent_correct",
    "wall_time_ms",
];

/// One run of one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub family: String,
    pub n: usize,
    pub p: f64,
    /// Number of parents of the reward.
    pub m: usize,
    /// Seed of the run's own stream.
    pub seed: u64,
    pub interventions: u64,
    /// Expected interventions for the sampled graph.
    pub expected: f64,
    pub parent_correct: bool,
    pub wall_time_ms: u64,
}

pub fn write_records<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_to(path: &Path, records: &[RunRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(path)?;
    write_records(std::io::BufWriter::new(file), records)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// A run that raised an error instead of producing a record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunError {
    pub point: usize,
    pub run: usize,
    pub seed: u64,
    pub message: String,
}

pub fn write_errors_to(path: &Path, errors: &[RunError]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in errors {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}
