//! Hand-crafted behaviour descriptors and grid binning.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fitness;
use crate::genome::EncodingConfig;
use crate::kinematics::{Linkage, PathTrace, FIRST_JOINT, FIRST_STATIC};
use crate::Error;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Which descriptor set a repertoire is binned by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorSpace {
    /// Path width, path height.
    Wh,
    /// Mean beam length, lift.
    Lis,
    /// Mean beam length, longest static→foot path, contributing nodes,
    /// moving fraction.
    St,
    /// Autoencoder latent.
    Au,
}

impl DescriptorSpace {
    pub fn dims(self) -> usize {
        match self {
            DescriptorSpace::Wh | DescriptorSpace::Lis => 2,
            DescriptorSpace::St | DescriptorSpace::Au => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DescriptorSpace::Wh => "wh",
            DescriptorSpace::Lis => "lis",
            DescriptorSpace::St => "st",
            DescriptorSpace::Au => "au",
        }
    }

    /// Default grid: 100 bins per axis in 2-D, 10 in 4-D (10,000 cells).
    /// Latent bounds are placeholders until the autoencoder sets them.
    pub fn default_grid(self, encoding: &EncodingConfig) -> GridSpec {
        let d = GridDim::new;
        let dims = match self {
            DescriptorSpace::Wh => vec![d(0.0, 300.0, 100), d(0.0, 300.0, 100)],
            DescriptorSpace::Lis => vec![d(0.0, 300.0, 100), d(0.0, 150.0, 100)],
            DescriptorSpace::St => vec![
                d(encoding.beam_len_range.min, encoding.beam_len_range.max, 10),
                d(1.0, ST_PATH_CAP, 10),
                d(1.0, 10.0, 10),
                d(0.0, 1.0, 10),
            ],
            DescriptorSpace::Au => vec![d(-1.0, 1.0, 10); 4],
        };
        GridSpec { dims }
    }
}

/// Value used for the static→foot path length when no static node is
/// connected to the foot.
pub const ST_PATH_CAP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub values: Vec<f64>,
    pub space: DescriptorSpace,
}

impl Descriptor {
    pub fn new(space: DescriptorSpace, values: Vec<f64>) -> Self {
        Self { values, space }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDim {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl GridDim {
    pub const fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self { lo, hi, bins }
    }

    /// `floor((v - lo) / (hi - lo) · bins)`, clamped to the edge bins.
    pub fn bin(&self, v: f64) -> usize {
        let t = ((v - self.lo) / (self.hi - self.lo) * self.bins as f64).floor();
        if !(t > 0.0) {
            0
        } else if t >= (self.bins - 1) as f64 {
            self.bins - 1
        } else {
            t as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: Vec<GridDim>,
}

impl GridSpec {
    pub fn total_cells(&self) -> usize {
        self.dims.iter().map(|d| d.bins).product()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.dims.is_empty() {
            return Err(Error::Config("grid needs at least one dimension".into()));
        }
        for d in &self.dims {
            if !(d.lo.is_finite() && d.hi.is_finite() && d.lo < d.hi && d.bins > 0) {
                return Err(Error::Config(alloc::format!("bad grid dimension [{}, {}] x {}", d.lo, d.hi, d.bins)));
            }
        }
        Ok(())
    }

    /// Row-major flattening, first dimension most significant.
    pub fn flatten(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.dims).fold(0, |acc, (&c, d)| acc * d.bins + c)
    }

    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dims.len()];
        for (c, d) in coords.iter_mut().zip(&self.dims).rev() {
            *c = index % d.bins;
            index /= d.bins;
        }
        coords
    }

    pub fn coords(&self, d: &Descriptor) -> Result<Vec<usize>, Error> {
        if d.values.len() != self.dims.len() {
            return Err(Error::DescriptorDims { expected: self.dims.len(), actual: d.values.len() });
        }
        Ok(d.values.iter().zip(&self.dims).map(|(&v, g)| g.bin(v)).collect())
    }
}

/// Cell index of a descriptor.
pub fn bin(d: &Descriptor, g: &GridSpec) -> Result<usize, Error> {
    Ok(g.flatten(&g.coords(d)?))
}

/// (width, height) of the foot path. `None` for an empty path.
pub fn descriptor_wh(t: &PathTrace) -> Option<Descriptor> {
    let m = t.metrics();
    m.valid.then(|| Descriptor::new(DescriptorSpace::Wh, vec![m.width, m.height]))
}

/// (mean beam length including the crank, lift).
pub fn descriptor_lis(l: &Linkage, t: &PathTrace) -> Option<Descriptor> {
    if t.foot_path.is_empty() {
        return None;
    }
    Some(Descriptor::new(DescriptorSpace::Lis, vec![l.mean_beam_length(), fitness::lift(t)]))
}

/// Structural descriptor, see [`DescriptorSpace::St`].
///
/// * longest path: over the static nodes connected to the foot through
///   beams, the largest shortest-path beam count; [`ST_PATH_CAP`] if none is
///   connected.
/// * contributing nodes: the foot plus every non-ground node it depends on.
/// * moving fraction: moving nodes / all nodes (motor and statics included).
pub fn descriptor_st(l: &Linkage, foot: usize) -> Descriptor {
    let n = l.node_count();
    let mut adjacency = vec![Vec::new(); n];
    for b in l.beams() {
        adjacency[b.a].push(b.b);
        adjacency[b.b].push(b.a);
    }
    let hops = bfs(&adjacency, foot);
    let longest = (FIRST_STATIC..FIRST_JOINT)
        .filter_map(|s| hops[s])
        .max()
        .map_or(ST_PATH_CAP, |h| (h as f64).min(ST_PATH_CAP));

    let mut contributing = vec![false; n];
    contributing[foot] = true;
    for node in (FIRST_STATIC..n).rev() {
        if contributing[node] && node >= FIRST_JOINT {
            for p in l.parents(node - FIRST_JOINT) {
                contributing[p] = true;
            }
        }
    }
    // ground nodes (motor, statics) are not part of the mechanism count
    let count = contributing.iter().enumerate().filter(|(i, c)| **c && (*i == 1 || *i >= FIRST_JOINT)).count();

    let moving = l.moving_nodes();
    let fraction = moving.iter().filter(|m| **m).count() as f64 / n as f64;
    Descriptor::new(DescriptorSpace::St, vec![l.mean_beam_length(), longest, count as f64, fraction])
}

fn bfs(adjacency: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}
