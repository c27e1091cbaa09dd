use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Algorithm, Evaluation};
use crate::descriptors::{bin, DescriptorSpace, GridSpec};
use crate::fitness::{FitnessKind, TargetPointSet};
use crate::genome::EncodingConfig;

/// How a repertoire or population was produced; enough to re-evaluate any
/// stored genome without the original run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub algorithm: Algorithm,
    pub fitness: FitnessKind,
    pub space: Option<DescriptorSpace>,
    pub seed: u64,
    pub iterations: usize,
    pub evaluations: usize,
    pub steps: usize,
    pub encoding: EncodingConfig,
    pub targets: TargetPointSet,
}

/// MAP-Elites grid: at most one elite per cell, each the best ever offered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repertoire {
    pub grid: GridSpec,
    pub meta: RunMeta,
    cells: BTreeMap<usize, Evaluation>,
}

impl Repertoire {
    pub fn new(grid: GridSpec, meta: RunMeta) -> Self {
        Self { grid, meta, cells: BTreeMap::new() }
    }

    pub fn fitness_kind(&self) -> FitnessKind {
        self.meta.fitness
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, cell: usize) -> Option<&Evaluation> {
        self.cells.get(&cell)
    }

    /// Elites in cell-index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Evaluation)> {
        self.cells.iter().map(|(&k, v)| (k, v))
    }

    pub fn elites(&self) -> impl Iterator<Item = &Evaluation> {
        self.cells.values()
    }

    pub fn coverage(&self) -> f64 {
        self.cells.len() as f64 / self.grid.total_cells() as f64
    }

    pub fn score(&self, e: &Evaluation) -> f64 {
        self.meta.fitness.score(e.fitness)
    }

    pub fn best(&self) -> Option<&Evaluation> {
        let mut best: Option<&Evaluation> = None;
        for e in self.cells.values() {
            if best.is_none_or(|b| self.score(e) > self.score(b)) {
                best = Some(e);
            }
        }
        best
    }

    /// Sum of `max(0, score - floor)` over elites.
    pub fn qd_score(&self, floor: f64) -> f64 {
        self.cells.values().map(|e| (self.score(e) - floor).max(0.0)).sum()
    }

    /// Places a stored elite directly (used when loading saved archives).
    pub fn restore(&mut self, cell: usize, e: Evaluation) {
        self.cells.insert(cell, e);
    }

    /// Offers `e` to the cell of its descriptor. It replaces the incumbent
    /// only when strictly better; ties keep the incumbent. Evaluations
    /// without a descriptor are refused.
    pub fn insert_elite(&mut self, e: Evaluation) -> bool {
        let Some(d) = &e.descriptor else { return false };
        let Ok(cell) = bin(d, &self.grid) else { return false };
        let kind = self.meta.fitness;
        match self.cells.get(&cell) {
            Some(inc) if kind.score(e.fitness) <= kind.score(inc.fitness) => false,
            _ => {
                self.cells.insert(cell, e);
                true
            }
        }
    }
}

/// Lower clamp for the QD-score terms of a fitness kind: `F_p` is bounded
/// below by a large per-target distance budget, `F_sl` by its penalties.
pub fn qd_floor(kind: FitnessKind, targets: usize, steps: usize) -> f64 {
    match kind {
        FitnessKind::Fp => -(300.0 * targets as f64 + steps as f64),
        FitnessKind::Fsl => -2.0 * steps as f64,
    }
}
