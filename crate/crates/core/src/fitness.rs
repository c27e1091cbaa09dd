//! Path-following (`F_p`) and step/lift (`F_sl`) fitness functions.
//!
//! Sign conventions follow the published formulas: `F_p` is maximised
//! (it is a negated distance sum) while `F_sl` and its two objectives are
//! minimised. [`FitnessKind::score`] maps any raw value onto a common
//! "higher is better" scale for selection. The infeasibility error count
//! is folded into every value in the direction that worsens it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::kinematics::PathTrace;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Distance charged per target point when the foot path is empty.
pub const EMPTY_PATH_DISTANCE: f64 = 1e6;

/// Vertical band (mm) above the lowest path point counted as ground contact.
pub const STEP_BAND: f64 = 5.0;

pub const STEP_WEIGHT: f64 = 0.8;
pub const LIFT_WEIGHT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessKind {
    /// Distance to a target point set (maximised).
    Fp,
    /// Weighted step length and lift (minimised).
    Fsl,
}

impl FitnessKind {
    /// Raw fitness mapped so that larger is always better.
    pub fn score(self, raw: f64) -> f64 {
        match self {
            FitnessKind::Fp => raw,
            FitnessKind::Fsl => -raw,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FitnessKind::Fp => "fp",
            FitnessKind::Fsl => "fsl",
        }
    }

    /// Scalar fitness of a trace.
    pub fn evaluate(self, t: &PathTrace, targets: &TargetPointSet) -> f64 {
        match self {
            FitnessKind::Fp => fitness_fp(t, targets),
            FitnessKind::Fsl => fitness_fsl(t),
        }
    }

    /// Two-objective variant, raw values.
    pub fn evaluate_mo(self, t: &PathTrace, targets: &TargetPointSet) -> [f64; 2] {
        match self {
            FitnessKind::Fp => fitness_fp_mo(t, targets),
            FitnessKind::Fsl => fitness_fsl_mo(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPointSet {
    pub step_points: Vec<Point>,
    pub lift_points: Vec<Point>,
}

impl TargetPointSet {
    pub fn all_points(&self) -> impl Iterator<Item = &Point> {
        self.step_points.iter().chain(&self.lift_points)
    }

    pub fn len(&self) -> usize {
        self.step_points.len() + self.lift_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for TargetPointSet {
    fn default() -> Self {
        default_target_points(&TargetShape::default())
    }
}

/// Parameters of the lying "D" target shape: a flat step line with an arc
/// of lift points above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetShape {
    pub n_step: usize,
    pub n_lift: usize,
    pub width: f64,
    pub height: f64,
    /// Position of the left end of the step line.
    pub origin: Point,
}

impl Default for TargetShape {
    fn default() -> Self {
        Self { n_step: 10, n_lift: 5, width: 60.0, height: 20.0, origin: Point::ORIGIN }
    }
}

/// Step points evenly spaced along `[0, width]`; lift points evenly spaced
/// in angle on the half-ellipse of height `height` spanning the step line.
pub fn default_target_points(shape: &TargetShape) -> TargetPointSet {
    let o = shape.origin;
    let step_points = (0..shape.n_step)
        .map(|i| {
            let t = if shape.n_step > 1 { i as f64 / (shape.n_step - 1) as f64 } else { 0.5 };
            Point::new(o.x + t * shape.width, o.y)
        })
        .collect();
    let half = shape.width / 2.0;
    let lift_points = (0..shape.n_lift)
        .map(|j| {
            let a = PI * (j + 1) as f64 / (shape.n_lift + 1) as f64;
            Point::new(o.x + half - half * a.cos(), o.y + shape.height * a.sin())
        })
        .collect();
    TargetPointSet { step_points, lift_points }
}

fn nearest_distance(target: Point, path: &[Point]) -> f64 {
    if path.is_empty() {
        return EMPTY_PATH_DISTANCE;
    }
    path.iter().map(|p| target.distance(*p)).fold(f64::INFINITY, f64::min)
}

fn distance_sum<'a>(targets: impl Iterator<Item = &'a Point>, path: &[Point]) -> f64 {
    targets.map(|&q| nearest_distance(q, path)).sum()
}

/// `-Σ D_i - error`, with `D_i` the distance from target `i` to the closest
/// foot-path vertex.
pub fn fitness_fp(t: &PathTrace, pts: &TargetPointSet) -> f64 {
    0.0 - distance_sum(pts.all_points(), &t.foot_path) - t.error_count as f64
}

/// `(step objective, lift objective)`, each carrying the error term.
pub fn fitness_fp_mo(t: &PathTrace, pts: &TargetPointSet) -> [f64; 2] {
    let e = t.error_count as f64;
    [-distance_sum(pts.step_points.iter(), &t.foot_path) - e, -distance_sum(pts.lift_points.iter(), &t.foot_path) - e]
}

/// Sign (-1, 0, +1) of the x motion at every foot-path point, from a
/// central difference over neighbouring crank steps. Missing neighbours
/// (dropped steps, open path ends) fall back to one-sided differences.
pub fn x_motion_signs(t: &PathTrace) -> Vec<i8> {
    let path = &t.foot_path;
    let n = path.len();
    let closed = t.is_closed();
    let adjacent = |i: usize, j: usize| -> bool {
        let (si, sj) = (t.foot_steps[i], t.foot_steps[j]);
        sj == si + 1 || (closed && si + 1 == t.steps && sj == 0)
    };
    (0..n)
        .map(|i| {
            if n < 2 {
                return 0;
            }
            let prev = if i > 0 { Some(i - 1) } else if closed { Some(n - 1) } else { None };
            let next = if i + 1 < n { Some(i + 1) } else if closed { Some(0) } else { None };
            let prev = prev.filter(|&p| adjacent(p, i));
            let next = next.filter(|&q| adjacent(i, q));
            let dx = match (prev, next) {
                (Some(p), Some(q)) => path[q].x - path[p].x,
                (None, Some(q)) => path[q].x - path[i].x,
                (Some(p), None) => path[i].x - path[p].x,
                (None, None) => 0.0,
            };
            if dx > 0.0 {
                1
            } else if dx < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Index of the first lowest foot-path point.
fn bottom_index(path: &[Point]) -> usize {
    let mut best = 0;
    for (i, p) in path.iter().enumerate() {
        if p.y < path[best].y {
            best = i;
        }
    }
    best
}

/// Length of the path within the ground band, counted only where the foot
/// moves in the same x direction as at its lowest point.
pub fn step_length(t: &PathTrace) -> f64 {
    let path = &t.foot_path;
    if path.len() < 2 {
        return 0.0;
    }
    let signs = x_motion_signs(t);
    let b = bottom_index(path);
    let sign_b = signs[b];
    if sign_b == 0 {
        return 0.0;
    }
    let y_b = path[b].y;
    let qualifies = |i: usize| signs[i] == sign_b && path[i].y <= y_b + STEP_BAND;
    let n = path.len();
    let closed = t.is_closed();
    let mut total = 0.0;
    for i in 0..n {
        let j = if i + 1 < n {
            if t.foot_steps[i + 1] != t.foot_steps[i] + 1 {
                continue;
            }
            i + 1
        } else if closed {
            0
        } else {
            continue;
        };
        if qualifies(i) && qualifies(j) {
            total += path[i].distance(path[j]);
        }
    }
    total
}

/// Greatest height above the lowest point reached while the foot moves
/// against its ground-contact direction.
pub fn lift(t: &PathTrace) -> f64 {
    let path = &t.foot_path;
    if path.len() < 2 {
        return 0.0;
    }
    let signs = x_motion_signs(t);
    let b = bottom_index(path);
    let sign_b = signs[b];
    if sign_b == 0 {
        return 0.0;
    }
    let y_b = path[b].y;
    path.iter()
        .zip(&signs)
        .filter(|(_, &s)| s == -sign_b)
        .map(|(p, _)| p.y - y_b)
        .fold(0.0, f64::max)
}

/// Number of feasible steps at which another moving node sits strictly
/// below the foot.
pub fn angle_error(t: &PathTrace) -> usize {
    t.positions
        .iter()
        .zip(&t.feasible)
        .filter(|(_, f)| **f)
        .filter(|(step, _)| {
            let foot = match step[t.foot_index] {
                Some(p) => p,
                None => return false,
            };
            step.iter()
                .enumerate()
                .any(|(n, p)| n != t.foot_index && t.moving[n] && p.is_some_and(|p| p.y < foot.y))
        })
        .count()
}

/// `-0.8·F_s - 0.2·F_l + F_ae + error`.
pub fn fitness_fsl(t: &PathTrace) -> f64 {
    -STEP_WEIGHT * step_length(t) - LIFT_WEIGHT * lift(t) + angle_error(t) as f64 + t.error_count as f64
}

/// `(-F_s + F_ae + error, -F_l + F_ae + error)`.
pub fn fitness_fsl_mo(t: &PathTrace) -> [f64; 2] {
    let penalty = angle_error(t) as f64 + t.error_count as f64;
    [-step_length(t) + penalty, -lift(t) + penalty]
}
