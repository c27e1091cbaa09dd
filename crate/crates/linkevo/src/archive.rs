//! Archive files: one JSON header line followed by one JSON record per
//! stored individual.
//!
//! The header carries everything needed to re-evaluate a stored genome
//! (encoding, targets, steps, fitness kind) and, for repertoires, the grid
//! the cell indices refer to. Floats are written in shortest round-trip
//! form, so load → save reproduces a file byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use linkevo_core::descriptors::{Descriptor, GridSpec};
use linkevo_core::evolve::{Evaluation, PathSummary, Repertoire, RunMeta};
use linkevo_core::Genome;
use serde::{Deserialize, Serialize};

use crate::Error;

pub const ARCHIVE_FORMAT: &str = "linkevo-archive";
pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchiveKind {
    /// MAP-Elites grid; record `cell` is a grid cell index.
    Repertoire,
    /// Final population of a non-grid run; `cell` is the member index.
    Population,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub format: String,
    pub version: u32,
    pub kind: ArchiveKind,
    pub run: RunMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Autoencoder checkpoint, relative to the archive's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aurora_checkpoint: Option<String>,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub cell: usize,
    pub genome: Genome,
    pub fitness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<Vec<f64>>,
    pub error_count: usize,
    pub summary: PathSummary,
}

impl ArchiveRecord {
    fn new(cell: usize, e: &Evaluation) -> Self {
        Self {
            cell,
            genome: e.genome.clone(),
            fitness: e.fitness,
            objectives: e.objectives,
            descriptor: e.descriptor.as_ref().map(|d| d.values.clone()),
            error_count: e.error_count,
            summary: e.summary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub header: ArchiveHeader,
    pub records: Vec<ArchiveRecord>,
}

impl Archive {
    pub fn from_repertoire(r: &Repertoire, aurora_checkpoint: Option<String>) -> Self {
        let records: Vec<ArchiveRecord> = r.iter().map(|(cell, e)| ArchiveRecord::new(cell, e)).collect();
        Self {
            header: ArchiveHeader {
                format: ARCHIVE_FORMAT.into(),
                version: ARCHIVE_VERSION,
                kind: ArchiveKind::Repertoire,
                run: r.meta.clone(),
                grid: Some(r.grid.clone()),
                aurora_checkpoint,
                records: records.len(),
            },
            records,
        }
    }

    pub fn from_population(meta: &RunMeta, population: &[Evaluation]) -> Self {
        let records: Vec<ArchiveRecord> = population.iter().enumerate().map(|(i, e)| ArchiveRecord::new(i, e)).collect();
        Self {
            header: ArchiveHeader {
                format: ARCHIVE_FORMAT.into(),
                version: ARCHIVE_VERSION,
                kind: ArchiveKind::Population,
                run: meta.clone(),
                grid: None,
                aurora_checkpoint: None,
                records: records.len(),
            },
            records,
        }
    }

    pub fn evaluation(&self, record: &ArchiveRecord) -> Evaluation {
        Evaluation {
            genome: record.genome.clone(),
            fitness: record.fitness,
            objectives: record.objectives,
            descriptor: match (&record.descriptor, self.header.run.space) {
                (Some(v), Some(space)) => Some(Descriptor::new(space, v.clone())),
                _ => None,
            },
            error_count: record.error_count,
            summary: record.summary,
        }
    }

    pub fn record(&self, cell: usize) -> Option<&ArchiveRecord> {
        self.records.iter().find(|r| r.cell == cell)
    }

    /// Rebuilds the repertoire of a grid archive.
    pub fn to_repertoire(&self) -> Result<Repertoire, Error> {
        let grid = self.header.grid.clone().ok_or_else(|| Error::Format("archive holds a population, not a grid".into()))?;
        let mut r = Repertoire::new(grid, self.header.run.clone());
        for rec in &self.records {
            r.restore(rec.cell, self.evaluation(rec));
        }
        Ok(r)
    }

    pub fn coverage(&self) -> Option<f64> {
        self.header.grid.as_ref().map(|g| self.records.len() as f64 / g.total_cells() as f64)
    }

    /// Best record by the run's fitness direction (first one on ties).
    pub fn best(&self) -> Option<&ArchiveRecord> {
        let kind = self.header.run.fitness;
        self.records.iter().fold(None, |best: Option<&ArchiveRecord>, r| match best {
            Some(b) if kind.score(b.fitness) >= kind.score(r.fitness) => Some(b),
            _ => Some(r),
        })
    }

    fn validate(&self) -> Result<(), Error> {
        let h = &self.header;
        if h.format != ARCHIVE_FORMAT {
            return Err(Error::Format(format!("not an archive (format {:?})", h.format)));
        }
        if h.version != ARCHIVE_VERSION {
            return Err(Error::Format(format!("unsupported archive version {}", h.version)));
        }
        if h.records != self.records.len() {
            return Err(Error::Format(format!("header announces {} records, found {}", h.records, self.records.len())));
        }
        h.run.encoding.validate()?;
        let cells = h.grid.as_ref().map(|g| g.total_cells());
        if let Some(g) = &h.grid {
            g.validate()?;
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.records {
            r.genome.validate(&h.run.encoding)?;
            if cells.is_some_and(|n| r.cell >= n) {
                return Err(Error::Format(format!("cell {} outside the grid", r.cell)));
            }
            if !seen.insert(r.cell) {
                return Err(Error::Format(format!("cell {} stored twice", r.cell)));
            }
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), Error> {
        let to_io = |e: serde_json::Error| Error::Json { line: 0, source: e };
        serde_json::to_writer(&mut w, &self.header).map_err(to_io)?;
        w.write_all(b"\n").map_err(Error::io("<archive>"))?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r).map_err(to_io)?;
            w.write_all(b"\n").map_err(Error::io("<archive>"))?;
        }
        w.flush().map_err(Error::io("<archive>"))
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, Error> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
        let (_, first) = lines.next().ok_or_else(|| Error::Format("empty archive".into()))?;
        let first = first.map_err(Error::io("<archive>"))?;
        let header: ArchiveHeader = serde_json::from_str(&first).map_err(|source| Error::Json { line: 1, source })?;
        let mut records = Vec::with_capacity(header.records);
        for (i, line) in lines {
            let line = line.map_err(Error::io("<archive>"))?;
            records.push(serde_json::from_str(&line).map_err(|source| Error::Json { line: i + 1, source })?);
        }
        let archive = Self { header, records };
        archive.validate()?;
        Ok(archive)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let file = File::create(path).map_err(Error::io(path))?;
        self.write(BufWriter::new(file)).map_err(|e| relabel(e, path))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let file = File::open(path).map_err(Error::io(path))?;
        Self::read(BufReader::new(file)).map_err(|e| match e {
            Error::Json { line, source } => Error::Format(format!("{}:{line}: {source}", path.display())),
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => relabel(other, path),
        })
    }

    /// Path of the checkpoint referenced by the header, resolved next to
    /// `archive_path`.
    pub fn checkpoint_path(&self, archive_path: &Path) -> Option<PathBuf> {
        let name = self.header.aurora_checkpoint.as_ref()?;
        Some(archive_path.parent().unwrap_or(Path::new(".")).join(name))
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io { path: path.to_path_buf(), source },
        other => other,
    }
}

/// Reads only the header line.
pub fn read_header(path: &Path) -> Result<ArchiveHeader, Error> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut line = String::new();
    BufReader::new(file).read_line(&mut line).map_err(Error::io(path))?;
    serde_json::from_str(&line).map_err(|source| Error::Json { line: 1, source })
}
