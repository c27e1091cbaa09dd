//! Linkage structure and the per-step position solver.
//!
//! Node numbering is fixed: `0` is the motor at the origin, `1` the crank
//! tip, `2..5` the static nodes, and joint `j` creates node `5 + j`. Beam
//! `0` is the crank; an extension joint adds one beam and a two-beam joint
//! adds two (to parent a, then to parent b).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::{circle_intersection, Branch, Point, TOLERANCE};
use crate::Error;

pub const MOTOR: usize = 0;
pub const CRANK_TIP: usize = 1;
pub const FIRST_STATIC: usize = 2;
pub const FIRST_JOINT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeamEnd {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Joint {
    /// Rigid continuation of an existing beam past one of its ends.
    Extension { parent_beam: usize, end: BeamEnd, angle_offset: f64, length: f64 },
    /// Node hung from two existing nodes by freely rotating beams.
    TwoBeam { parent_a: usize, parent_b: usize, branch: Branch, length_a: f64, length_b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    /// End A node.
    pub a: usize,
    /// End B node.
    pub b: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linkage {
    pub crank_length: f64,
    pub static_nodes: [Point; 3],
    pub joints: Vec<Joint>,
    beams: Vec<Beam>,
}

impl Linkage {
    pub fn new(crank_length: f64, static_nodes: [Point; 3]) -> Self {
        Self {
            crank_length,
            static_nodes,
            joints: Vec::new(),
            beams: vec![Beam { a: MOTOR, b: CRANK_TIP, length: crank_length }],
        }
    }

    /// Appends a joint. Parents must reference existing nodes or beams.
    pub fn push_joint(&mut self, joint: Joint) {
        let node = self.node_count();
        match joint {
            Joint::Extension { parent_beam, end, length, .. } => {
                assert!(parent_beam < self.beams.len(), "extension parent beam out of range");
                let parent = self.beams[parent_beam];
                let anchor = match end {
                    BeamEnd::A => parent.a,
                    BeamEnd::B => parent.b,
                };
                self.beams.push(Beam { a: anchor, b: node, length });
            }
            Joint::TwoBeam { parent_a, parent_b, length_a, length_b, .. } => {
                assert!(parent_a < node && parent_b < node, "two-beam parent out of range");
                self.beams.push(Beam { a: parent_a, b: node, length: length_a });
                self.beams.push(Beam { a: parent_b, b: node, length: length_b });
            }
        }
        self.joints.push(joint);
    }

    pub fn node_count(&self) -> usize {
        FIRST_JOINT + self.joints.len()
    }

    pub fn beam_count(&self) -> usize {
        self.beams.len()
    }

    pub fn beams(&self) -> &[Beam] {
        &self.beams
    }

    pub fn mean_beam_length(&self) -> f64 {
        self.beams.iter().map(|b| b.length).sum::<f64>() / self.beams.len() as f64
    }

    /// Sets the length of beam `index`, keeping the joint list in sync.
    pub fn set_beam_length(&mut self, index: usize, length: f64) -> Result<(), Error> {
        if index >= self.beams.len() {
            return Err(Error::NoSuchBeam { index, count: self.beams.len() });
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::BeamLength(length));
        }
        self.beams[index].length = length;
        if index == 0 {
            self.crank_length = length;
            return Ok(());
        }
        let mut next = 1;
        for joint in &mut self.joints {
            match joint {
                Joint::Extension { length: l, .. } => {
                    if next == index {
                        *l = length;
                    }
                    next += 1;
                }
                Joint::TwoBeam { length_a, length_b, .. } => {
                    if next == index {
                        *length_a = length;
                    } else if next + 1 == index {
                        *length_b = length;
                    }
                    next += 2;
                }
            }
        }
        Ok(())
    }

    /// Nodes whose position depends on the crank angle.
    pub fn moving_nodes(&self) -> Vec<bool> {
        let mut moving = vec![false; self.node_count()];
        moving[CRANK_TIP] = true;
        for j in 0..self.joints.len() {
            moving[FIRST_JOINT + j] = self.parents(j).iter().any(|&p| moving[p]);
        }
        moving
    }

    /// Nodes a joint's position is computed from.
    pub fn parents(&self, joint: usize) -> [usize; 2] {
        match self.joints[joint] {
            Joint::Extension { parent_beam, .. } => {
                let beam = self.beams[parent_beam];
                [beam.a, beam.b]
            }
            Joint::TwoBeam { parent_a, parent_b, .. } => [parent_a, parent_b],
        }
    }

    /// Index of the first beam created by `joint`.
    pub fn first_beam_of(&self, joint: usize) -> usize {
        1 + self.joints[..joint]
            .iter()
            .map(|j| match j {
                Joint::Extension { .. } => 1,
                Joint::TwoBeam { .. } => 2,
            })
            .sum::<usize>()
    }

    /// Positions of every node at crank angle `angle`; `None` marks nodes
    /// that cannot be placed.
    pub fn positions_at(&self, angle: f64) -> Vec<Option<Point>> {
        let mut pos = Vec::with_capacity(self.node_count());
        pos.push(Some(Point::ORIGIN));
        pos.push(Some(Point::polar(self.crank_length, angle)));
        pos.extend(self.static_nodes.iter().map(|&p| Some(p)));
        for joint in &self.joints {
            let p = match *joint {
                Joint::Extension { parent_beam, end, angle_offset, length } => {
                    let beam = self.beams[parent_beam];
                    let (anchor, other) = match end {
                        BeamEnd::A => (beam.a, beam.b),
                        BeamEnd::B => (beam.b, beam.a),
                    };
                    match (pos[anchor], pos[other]) {
                        (Some(pa), Some(po)) => {
                            let dir = pa - po;
                            let d = dir.norm();
                            if d < TOLERANCE {
                                None
                            } else {
                                Some(pa + (dir * (1.0 / d)).rotate(angle_offset) * length)
                            }
                        }
                        _ => None,
                    }
                }
                Joint::TwoBeam { parent_a, parent_b, branch, length_a, length_b } => match (pos[parent_a], pos[parent_b]) {
                    (Some(a), Some(b)) => circle_intersection(a, length_a, b, length_b, branch),
                    _ => None,
                },
            };
            pos.push(p);
        }
        pos
    }

    /// Simulates one full crank rotation in `steps` equal increments.
    pub fn solve(&self, steps: usize) -> PathTrace {
        assert!(steps >= 3, "need at least 3 crank steps");
        let positions: Vec<Vec<Option<Point>>> =
            (0..steps).map(|k| self.positions_at(TAU * k as f64 / steps as f64)).collect();
        let feasible: Vec<bool> = positions.iter().map(|step| step.iter().all(Option::is_some)).collect();
        let error_count = feasible.iter().filter(|f| !**f).count();
        let moving = self.moving_nodes();

        let mut foot_index = CRANK_TIP;
        let mut lowest = f64::INFINITY;
        for node in (0..self.node_count()).filter(|&n| moving[n]) {
            let min_y = positions
                .iter()
                .zip(&feasible)
                .filter(|(_, f)| **f)
                .filter_map(|(step, _)| step[node].map(|p| p.y))
                .fold(f64::INFINITY, f64::min);
            if min_y < lowest {
                lowest = min_y;
                foot_index = node;
            }
        }

        let mut foot_path = Vec::with_capacity(steps - error_count);
        let mut foot_steps = Vec::with_capacity(steps - error_count);
        for (k, step) in positions.iter().enumerate() {
            if feasible[k] {
                foot_path.push(step[foot_index].expect("feasible step"));
                foot_steps.push(k);
            }
        }
        PathTrace { steps, positions, feasible, moving, foot_index, foot_path, foot_steps, error_count }
    }
}

/// Result of simulating one crank rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    /// Number of crank steps `K`; step `k` is at angle `2πk/K`.
    pub steps: usize,
    /// Per step, per node position (`None` where the node cannot be placed).
    pub positions: Vec<Vec<Option<Point>>>,
    /// Whether every node could be placed at each step.
    pub feasible: Vec<bool>,
    /// Per node, whether it moves with the crank.
    pub moving: Vec<bool>,
    pub foot_index: usize,
    /// Foot positions at the feasible steps, in step order.
    pub foot_path: Vec<Point>,
    /// Step index of each `foot_path` entry.
    pub foot_steps: Vec<usize>,
    /// Number of infeasible steps.
    pub error_count: usize,
}

impl PathTrace {
    /// A trace holding only a foot path, every step feasible. Used for
    /// hand-constructed paths; there is a single moving node (the foot).
    pub fn from_foot_path(path: Vec<Point>) -> Self {
        let steps = path.len();
        Self {
            steps,
            positions: path.iter().map(|&p| vec![Some(p)]).collect(),
            feasible: vec![true; steps],
            moving: vec![true],
            foot_index: 0,
            foot_steps: (0..steps).collect(),
            foot_path: path,
            error_count: 0,
        }
    }

    /// Whether the foot path forms a closed loop (no step was dropped).
    pub fn is_closed(&self) -> bool {
        self.error_count == 0 && self.foot_path.len() == self.steps
    }

    pub fn metrics(&self) -> PathMetrics {
        path_metrics(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub width: f64,
    pub height: f64,
    pub min_y: f64,
    /// False when the foot path is empty (all metrics are then zero).
    pub valid: bool,
}

/// Bounding-box width/height of the foot path.
pub fn path_metrics(t: &PathTrace) -> PathMetrics {
    if t.foot_path.is_empty() {
        return PathMetrics { width: 0.0, height: 0.0, min_y: 0.0, valid: false };
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &t.foot_path {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    PathMetrics { width: x1 - x0, height: y1 - y0, min_y: y0, valid: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_bar() -> Linkage {
        let mut l = Linkage::new(30.0, [Point::new(100.0, 0.0), Point::new(0.0, 200.0), Point::new(0.0, 200.0)]);
        l.push_joint(Joint::TwoBeam { parent_a: CRANK_TIP, parent_b: 2, branch: Branch::Left, length_a: 90.0, length_b: 70.0 });
        l
    }

    #[test]
    fn crank_only_traces_a_circle() {
        let l = Linkage::new(25.0, [Point::new(0.0, 80.0); 3]);
        let t = l.solve(72);
        assert_eq!(t.error_count, 0);
        assert_eq!(t.foot_index, CRANK_TIP);
        assert_eq!(t.foot_path.len(), 72);
        for p in &t.foot_path {
            assert!((p.norm() - 25.0).abs() < 1e-12);
        }
        let m = t.metrics();
        assert!((m.width - 50.0).abs() < 1e-9 && (m.height - 50.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_two_beam_joint_fails_every_step() {
        let mut l = Linkage::new(10.0, [Point::new(300.0, 0.0), Point::ORIGIN, Point::ORIGIN]);
        l.push_joint(Joint::TwoBeam { parent_a: CRANK_TIP, parent_b: 2, branch: Branch::Left, length_a: 50.0, length_b: 50.0 });
        let t = l.solve(36);
        assert_eq!(t.error_count, 36);
        assert!(t.foot_path.is_empty());
        assert!(!t.metrics().valid);
    }

    #[test]
    fn beam_list_tracks_joints() {
        let mut l = four_bar();
        l.push_joint(Joint::Extension { parent_beam: 1, end: BeamEnd::B, angle_offset: 0.0, length: 20.0 });
        assert_eq!(l.beam_count(), 4);
        assert_eq!(l.beams()[3], Beam { a: 5, b: 6, length: 20.0 });
        assert_eq!(l.first_beam_of(1), 3);
        l.set_beam_length(2, 75.0).unwrap();
        assert!(matches!(l.joints[0], Joint::TwoBeam { length_b, .. } if length_b == 75.0));
        l.set_beam_length(3, 21.0).unwrap();
        assert!(matches!(l.joints[1], Joint::Extension { length, .. } if length == 21.0));
        assert!(l.set_beam_length(9, 1.0).is_err());
        assert!(l.set_beam_length(0, -1.0).is_err());
    }

    #[test]
    fn moving_nodes_follow_dependencies() {
        let mut l = four_bar();
        // hangs from two static nodes only, so it never moves
        l.push_joint(Joint::TwoBeam { parent_a: 2, parent_b: 3, branch: Branch::Left, length_a: 150.0, length_b: 150.0 });
        let m = l.moving_nodes();
        assert_eq!(m, vec![false, true, false, false, false, true, false]);
    }

    #[test]
    fn single_point_metrics_are_zero() {
        let t = PathTrace::from_foot_path(vec![Point::new(3.0, 4.0)]);
        let m = path_metrics(&t);
        assert!(m.valid && m.width == 0.0 && m.height == 0.0);
    }
}
