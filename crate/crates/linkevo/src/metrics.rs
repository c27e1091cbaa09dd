//! Per-iteration metrics log: one JSON object per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use linkevo_core::evolve::IterationRecord;

use crate::Error;

pub struct MetricsLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl MetricsLog {
    pub fn create(path: &Path) -> Result<Self, Error> {
        let file = File::create(path).map_err(Error::io(path))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    /// Appends and flushes one record, so a running job can be followed.
    pub fn append(&mut self, r: &IterationRecord) -> Result<(), Error> {
        let line = serde_json::to_string(r).map_err(|source| Error::Json { line: r.iteration + 1, source })?;
        writeln!(self.out, "{line}").and_then(|_| self.out.flush()).map_err(Error::io(&self.path))
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<IterationRecord>, Error> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(|source| Error::Json { line: i + 1, source })?);
        }
    }
    Ok(out)
}
