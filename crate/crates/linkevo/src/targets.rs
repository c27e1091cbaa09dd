//! Target point files: CSV rows of `x,y,set` where `set` is `step` or
//! `lift`. Lines starting with `#` are comments.

use std::io::Read;
use std::path::Path;

use linkevo_core::fitness::TargetPointSet;
use linkevo_core::Point;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSet {
    Step,
    Lift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub x: f64,
    pub y: f64,
    pub set: TargetSet,
}

pub fn read_targets<R: Read>(r: R) -> Result<TargetPointSet, Error> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let mut out = TargetPointSet { step_points: Vec::new(), lift_points: Vec::new() };
    for row in reader.deserialize() {
        let row: TargetRow = row?;
        if !(row.x.is_finite() && row.y.is_finite()) {
            return Err(Error::Format(format!("non-finite target point ({}, {})", row.x, row.y)));
        }
        let p = Point::new(row.x, row.y);
        match row.set {
            TargetSet::Step => out.step_points.push(p),
            TargetSet::Lift => out.lift_points.push(p),
        }
    }
    if out.step_points.is_empty() || out.lift_points.is_empty() {
        return Err(Error::Format("target file needs at least one step and one lift point".into()));
    }
    Ok(out)
}

pub fn load_targets(path: &Path) -> Result<TargetPointSet, Error> {
    let file = std::fs::File::open(path).map_err(Error::io(path))?;
    read_targets(file).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_targets<W: std::io::Write>(t: &TargetPointSet, w: W) -> Result<(), Error> {
    let mut writer = csv::Writer::from_writer(w);
    let rows = t
        .step_points
        .iter()
        .map(|p| (p, TargetSet::Step))
        .chain(t.lift_points.iter().map(|p| (p, TargetSet::Lift)));
    for (p, set) in rows {
        writer.serialize(TargetRow { x: p.x, y: p.y, set })?;
    }
    writer.flush().map_err(Error::io("<targets>"))
}
