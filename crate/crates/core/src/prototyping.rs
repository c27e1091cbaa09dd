//! Turning a repertoire into something a person can browse and build:
//! coarse display grids and brick-snapped parts lists.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::evolve::{Evaluation, Evaluator, Repertoire, RunMeta};
use crate::geometry::Point;
use crate::kinematics::Linkage;
use crate::Error;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// LEGO Technic hole pitch in mm.
pub const DEFAULT_PITCH: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayCell {
    pub row: usize,
    pub col: usize,
    /// Cell index of the elite in the source repertoire.
    pub source_cell: usize,
    pub elite: Evaluation,
    pub foot_path: Vec<Point>,
    /// Larger side of the foot path's bounding box (mm).
    pub extent: f64,
    /// `extent` relative to the largest extent in the map.
    pub relative_scale: f64,
}

/// Coarse view of a repertoire: the best elite of each block of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownsampledMap {
    pub rows: usize,
    pub cols: usize,
    /// Source dimensions shown along columns (x) and rows (y).
    pub display_dims: (usize, usize),
    /// Row-major, row 0 holding the lowest values of the row dimension.
    pub cells: Vec<Option<DisplayCell>>,
}

impl DownsampledMap {
    pub fn get(&self, row: usize, col: usize) -> Option<&DisplayCell> {
        self.cells.get(row * self.cols + col).and_then(Option::as_ref)
    }

    pub fn populated(&self) -> impl Iterator<Item = &DisplayCell> {
        self.cells.iter().flatten()
    }
}

/// Display block of a source bin when `bins` are split into `blocks`
/// contiguous groups.
pub fn block_of(bin: usize, bins: usize, blocks: usize) -> usize {
    (bin * blocks / bins).min(blocks - 1)
}

/// Groups the source grid into `rows × cols` blocks over `display_dims`
/// (column dimension, row dimension). Each block keeps the best elite over
/// its bins and over every bin of the dimensions not displayed; ties keep
/// the lowest source cell.
pub fn downsample(r: &Repertoire, rows: usize, cols: usize, display_dims: (usize, usize)) -> Result<DownsampledMap, Error> {
    let dims = r.grid.dims.len();
    let (dc, dr) = display_dims;
    if rows == 0 || cols == 0 {
        return Err(Error::Config("display grid needs at least one row and column".into()));
    }
    if dc >= dims || dr >= dims || (dc == dr && dims > 1) {
        return Err(Error::Config(alloc::format!("display dims {display_dims:?} invalid for a {dims}-D grid")));
    }
    let mut best: Vec<Option<(usize, &Evaluation)>> = alloc::vec![None; rows * cols];
    for (cell, e) in r.iter() {
        let coords = r.grid.unflatten(cell);
        let col = block_of(coords[dc], r.grid.dims[dc].bins, cols);
        let row = block_of(coords[dr], r.grid.dims[dr].bins, rows);
        let slot = &mut best[row * cols + col];
        if slot.is_none_or(|(_, inc)| r.score(e) > r.score(inc)) {
            *slot = Some((cell, e));
        }
    }
    let evaluator = display_evaluator(&r.meta);
    let mut cells: Vec<Option<DisplayCell>> = best
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.map(|(source_cell, e)| {
                let (_, trace) = evaluator.simulate(&e.genome);
                let m = trace.metrics();
                DisplayCell {
                    row: i / cols,
                    col: i % cols,
                    source_cell,
                    elite: e.clone(),
                    foot_path: trace.foot_path,
                    extent: m.width.max(m.height),
                    relative_scale: 1.0,
                }
            })
        })
        .collect();
    let largest = cells.iter().flatten().map(|c| c.extent).fold(0.0, f64::max);
    if largest > 0.0 {
        for c in cells.iter_mut().flatten() {
            c.relative_scale = c.extent / largest;
        }
    }
    Ok(DownsampledMap { rows, cols, display_dims, cells })
}

/// Evaluator reproducing the scalar fitness a run used.
pub fn display_evaluator(meta: &RunMeta) -> Evaluator {
    Evaluator {
        encoding: meta.encoding,
        steps: meta.steps,
        fitness: meta.fitness,
        targets: meta.targets.clone(),
        multiobjective: false,
        space: None,
    }
}

/// Nearest multiple of `pitch` (halfway rounds up), at least one pitch.
pub fn snap_length(length: f64, pitch: f64) -> f64 {
    let n = (length / pitch + 0.5).floor().max(1.0);
    n * pitch
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPart {
    pub index: usize,
    /// End node ids.
    pub a: usize,
    pub b: usize,
    pub evolved_length: f64,
    pub snapped_length: f64,
    pub holes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSheet {
    pub pitch: f64,
    pub beams: Vec<BeamPart>,
    pub evolved_fitness: f64,
    pub evolved_error_count: usize,
    pub snapped_fitness: f64,
    pub snapped_error_count: usize,
    pub steps: usize,
    /// The snapped linkage cannot complete a single crank step.
    pub infeasible: bool,
}

impl BuildSheet {
    pub fn fitness_delta(&self) -> f64 {
        self.snapped_fitness - self.evolved_fitness
    }
}

/// Replaces beam lengths of `linkage`.
pub fn apply_overrides(linkage: &mut Linkage, overrides: &[(usize, f64)]) -> Result<(), Error> {
    for &(index, length) in overrides {
        linkage.set_beam_length(index, length)?;
    }
    Ok(())
}

/// Snaps every beam of the evaluation's linkage to the brick pitch and
/// re-simulates the result.
pub fn build_sheet(e: &Evaluation, pitch: f64, meta: &RunMeta) -> Result<BuildSheet, Error> {
    build_sheet_for(&e.genome.decode(&meta.encoding), pitch, meta)
}

/// [`build_sheet`] for an explicit (possibly hand-edited) linkage,
/// simulated with the settings of `meta`.
pub fn build_sheet_for(linkage: &Linkage, pitch: f64, meta: &RunMeta) -> Result<BuildSheet, Error> {
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(Error::Config(alloc::format!("pitch must be positive, got {pitch}")));
    }
    let trace = linkage.solve(meta.steps);
    let evolved_fitness = meta.fitness.evaluate(&trace, &meta.targets);
    let beams: Vec<BeamPart> = linkage
        .beams()
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let snapped = snap_length(b.length, pitch);
            BeamPart { index, a: b.a, b: b.b, evolved_length: b.length, snapped_length: snapped, holes: (snapped / pitch).round() as usize }
        })
        .collect();
    let mut snapped = linkage.clone();
    let overrides: Vec<(usize, f64)> = beams.iter().map(|p| (p.index, p.snapped_length)).collect();
    apply_overrides(&mut snapped, &overrides)?;
    let snapped_trace = snapped.solve(meta.steps);
    Ok(BuildSheet {
        pitch,
        evolved_fitness,
        evolved_error_count: trace.error_count,
        snapped_fitness: meta.fitness.evaluate(&snapped_trace, &meta.targets),
        snapped_error_count: snapped_trace.error_count,
        steps: meta.steps,
        infeasible: snapped_trace.error_count == meta.steps,
        beams,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_rounds_to_nearest_pitch() {
        assert_eq!(snap_length(43.0, 8.0), 40.0);
        assert_eq!(snap_length(44.0, 8.0), 48.0);
        assert_eq!(snap_length(40.0, 8.0), 40.0);
        assert_eq!(snap_length(2.0, 8.0), 8.0);
    }

    #[test]
    fn blocks_partition_bins() {
        assert_eq!(block_of(0, 100, 5), 0);
        assert_eq!(block_of(19, 100, 5), 0);
        assert_eq!(block_of(20, 100, 5), 1);
        assert_eq!(block_of(99, 100, 5), 4);
        assert_eq!(block_of(1, 10, 5), 0);
        assert_eq!(block_of(2, 10, 5), 1);
        assert_eq!(block_of(4, 5, 5), 4);
    }
}
