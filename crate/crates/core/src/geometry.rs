//! 2D points and the circle–circle intersection used by two-beam joints.

use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Positions closer than this (mm) are treated as coincident, and circle
/// distances within it of tangency are treated as tangent.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (other - self).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left-hand normal (rotated by +90°).
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Which of the two circle intersections to take, relative to the directed
/// line from the first centre to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Left,
    Right,
}

/// Intersects circle (`c1`, `r1`) with circle (`c2`, `r2`).
///
/// Returns `None` when the circles are separate, nested, or concentric.
/// Near-tangent configurations (within [`TOLERANCE`]) collapse to the single
/// tangent point whichever branch is asked for.
pub fn circle_intersection(c1: Point, r1: f64, c2: Point, r2: f64, branch: Branch) -> Option<Point> {
    let delta = c2 - c1;
    let d = delta.norm();
    if d < TOLERANCE || d > r1 + r2 + TOLERANCE || d < (r1 - r2).abs() - TOLERANCE {
        return None;
    }
    let u = delta * (1.0 / d);
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h2 = r1 * r1 - a * a;
    let h = if h2 > 0.0 { h2.sqrt() } else { 0.0 };
    let mid = c1 + u * a;
    let offset = u.perp() * h;
    Some(match branch {
        Branch::Left => mid + offset,
        Branch::Right => mid - offset,
    })
}
