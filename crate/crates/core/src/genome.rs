//! Genotype, random initialisation, self-adaptive mutation and decoding.
//!
//! A genome is a flat vector of reals in `[0, 1]` cut into sections of
//! seven genes. The header section places the three static nodes and sets
//! the crank length; every following section adds one joint:
//!
//! | slot | extension joint       | two-beam joint            |
//! |------|-----------------------|---------------------------|
//! | 0    | type (< 0.25)         | type (>= 0.25)            |
//! | 1    | unused                | parent node a             |
//! | 2    | parent beam           | parent node b             |
//! | 3    | beam end (A / B)      | intersection branch       |
//! | 4    | angle offset          | unused                    |
//! | 5    | length                | length of beam to a       |
//! | 6    | unused                | length of beam to b       |
//!
//! Unused slots stay in the genome so a type flip reuses earlier values.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{Branch, Point};
use crate::kinematics::{BeamEnd, Joint, Linkage};
use crate::Error;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub const SECTION_LEN: usize = 7;

/// Type genes below this decode to an extension joint.
pub const EXTENSION_THRESHOLD: f64 = 0.25;

pub const INITIAL_SIGMA: f64 = 0.1;

/// Probability that a non-length gene (and sigma) receives noise.
pub const MUTATION_PROBABILITY: f64 = 0.2;

/// Standard deviation of the noise applied to sigma itself.
pub const SIGMA_NOISE: f64 = 0.1;

const HEADER_CRANK_SLOT: usize = 6;
const SLOT_TYPE: usize = 0;
const SLOT_NODE_A: usize = 1;
const SLOT_BEAM_OR_NODE_B: usize = 2;
const SLOT_DIRECTION: usize = 3;
const SLOT_ANGLE: usize = 4;
const SLOT_LENGTH: usize = 5;
const SLOT_LENGTH_B: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthRange {
    pub min: f64,
    pub max: f64,
}

impl LengthRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Linear map of a gene in `[0, 1]` onto the range.
    pub fn map(&self, gene: f64) -> f64 {
        self.min + gene * (self.max - self.min)
    }

    fn validate(&self, what: &str) -> Result<(), Error> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(alloc::format!("{what}: need min < max, got [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    /// Number of joint sections after the header.
    pub n_joints: usize,
    /// Half-width (mm) of the square the static nodes are placed in.
    pub static_pos_range: f64,
    pub crank_len_range: LengthRange,
    pub beam_len_range: LengthRange,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            n_joints: 8,
            static_pos_range: 100.0,
            crank_len_range: LengthRange::new(10.0, 60.0),
            beam_len_range: LengthRange::new(16.0, 152.0),
        }
    }
}

impl EncodingConfig {
    pub fn genome_len(&self) -> usize {
        SECTION_LEN * (1 + self.n_joints)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n_joints == 0 {
            return Err(Error::Config("n_joints must be at least 1".into()));
        }
        if !(self.static_pos_range.is_finite() && self.static_pos_range > 0.0) {
            return Err(Error::Config("static_pos_range must be positive".into()));
        }
        self.crank_len_range.validate("crank_len_range")?;
        self.beam_len_range.validate("beam_len_range")?;
        if self.crank_len_range.min <= 0.0 || self.beam_len_range.min <= 0.0 {
            return Err(Error::Config("length ranges must be positive".into()));
        }
        Ok(())
    }

    fn static_coord(&self, gene: f64) -> f64 {
        (2.0 * gene - 1.0) * self.static_pos_range
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub genes: Vec<f64>,
    /// Self-adaptive mutation step size.
    pub sigma: f64,
}

impl Genome {
    pub fn new(genes: Vec<f64>, sigma: f64) -> Self {
        Self { genes, sigma }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, cfg: &EncodingConfig) -> Self {
        let genes = (0..cfg.genome_len()).map(|_| rng.random::<f64>()).collect();
        Self { genes, sigma: INITIAL_SIGMA }
    }

    pub fn validate(&self, cfg: &EncodingConfig) -> Result<(), Error> {
        if self.genes.len() != cfg.genome_len() {
            return Err(Error::GenomeLength { expected: cfg.genome_len(), actual: self.genes.len() });
        }
        if let Some((index, &value)) = self.genes.iter().enumerate().find(|(_, g)| !(0.0..=1.0).contains(*g)) {
            return Err(Error::GeneRange { index, value });
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::GeneRange { index: self.genes.len(), value: self.sigma });
        }
        Ok(())
    }

    fn section(&self, joint: usize) -> &[f64] {
        let start = SECTION_LEN * (joint + 1);
        &self.genes[start..start + SECTION_LEN]
    }

    /// Indices of the genes that currently encode a crank or beam length.
    pub fn length_gene_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        out.push(HEADER_CRANK_SLOT);
        let sections = self.genes.len() / SECTION_LEN;
        for s in 1..sections {
            let base = s * SECTION_LEN;
            out.push(base + SLOT_LENGTH);
            if self.genes[base + SLOT_TYPE] >= EXTENSION_THRESHOLD {
                out.push(base + SLOT_LENGTH_B);
            }
        }
        out
    }

    /// Self-adaptive Gaussian mutation with bounce-back.
    ///
    /// Length genes always receive `N(0, sigma)` noise; every other gene
    /// receives it with probability 0.2. Sigma receives `N(0, 0.1)` with
    /// probability 0.2. Gene noise uses the parent's sigma. All values are
    /// reflected back into `[0, 1]` afterwards.
    pub fn mutate<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let sigma = self.sigma;
        let lengths = self.length_gene_indices();
        let mut is_length = alloc::vec![false; self.genes.len()];
        for i in lengths {
            is_length[i] = true;
        }
        let genes = self
            .genes
            .iter()
            .zip(is_length)
            .map(|(&g, always)| {
                if always || rng.random_bool(MUTATION_PROBABILITY) {
                    let z: f64 = rng.sample(StandardNormal);
                    bounce_back(g + sigma * z)
                } else {
                    g
                }
            })
            .collect();
        let sigma = if rng.random_bool(MUTATION_PROBABILITY) {
            let z: f64 = rng.sample(StandardNormal);
            bounce_back(sigma + SIGMA_NOISE * z)
        } else {
            sigma
        };
        Genome { genes, sigma }
    }

    /// Decodes the genome into a linkage. Every well-formed genome decodes;
    /// infeasible geometry only shows up when the linkage is solved.
    pub fn decode(&self, cfg: &EncodingConfig) -> Linkage {
        let h = &self.genes[..SECTION_LEN];
        let static_nodes = [
            Point::new(cfg.static_coord(h[0]), cfg.static_coord(h[1])),
            Point::new(cfg.static_coord(h[2]), cfg.static_coord(h[3])),
            Point::new(cfg.static_coord(h[4]), cfg.static_coord(h[5])),
        ];
        let crank_length = cfg.crank_len_range.map(h[HEADER_CRANK_SLOT]);
        let mut linkage = Linkage::new(crank_length, static_nodes);
        let sections = self.genes.len() / SECTION_LEN - 1;
        for j in 0..sections {
            let s = self.section(j);
            let joint = if s[SLOT_TYPE] < EXTENSION_THRESHOLD {
                Joint::Extension {
                    parent_beam: map_index(s[SLOT_BEAM_OR_NODE_B], linkage.beam_count()),
                    end: if s[SLOT_DIRECTION] >= 0.5 { BeamEnd::B } else { BeamEnd::A },
                    angle_offset: s[SLOT_ANGLE] * TAU,
                    length: cfg.beam_len_range.map(s[SLOT_LENGTH]),
                }
            } else {
                let n = linkage.node_count();
                let parent_a = map_index(s[SLOT_NODE_A], n);
                let mut parent_b = map_index(s[SLOT_BEAM_OR_NODE_B], n);
                if parent_a == parent_b {
                    parent_b = (parent_b + 1) % n;
                }
                Joint::TwoBeam {
                    parent_a,
                    parent_b,
                    branch: if s[SLOT_DIRECTION] >= 0.5 { Branch::Left } else { Branch::Right },
                    length_a: cfg.beam_len_range.map(s[SLOT_LENGTH]),
                    length_b: cfg.beam_len_range.map(s[SLOT_LENGTH_B]),
                }
            };
            linkage.push_joint(joint);
        }
        linkage
    }
}

/// Maps a gene in `[0, 1]` onto `0..size` with equal probability per index.
pub fn map_index(gene: f64, size: usize) -> usize {
    debug_assert!(size > 0);
    let i = (gene * size as f64).floor();
    if i <= 0.0 {
        0
    } else {
        (i as usize).min(size - 1)
    }
}

/// Reflects `v` at 0 and 1 until it lies inside `[0, 1]`.
pub fn bounce_back(mut v: f64) -> f64 {
    if !v.is_finite() {
        return 0.5;
    }
    loop {
        if v < 0.0 {
            v = -v;
        } else if v > 1.0 {
            v = 2.0 - v;
        } else {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn genome_length_follows_joint_count() {
        let cfg = EncodingConfig::default();
        let g = Genome::random(&mut ChaCha8Rng::seed_from_u64(1), &cfg);
        assert_eq!(g.genes.len(), 63);
        assert_eq!(g.sigma, 0.1);
    }

    #[test]
    fn same_seed_same_genome() {
        let cfg = EncodingConfig::default();
        let a = Genome::random(&mut ChaCha8Rng::seed_from_u64(9), &cfg);
        let b = Genome::random(&mut ChaCha8Rng::seed_from_u64(9), &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn bounce_back_reflects_at_both_ends() {
        assert!((bounce_back(0.98 + 0.06) - 0.96).abs() < 1e-12);
        assert!((bounce_back(-0.25) - 0.25).abs() < 1e-15);
        assert!((bounce_back(2.3) - 0.3).abs() < 1e-12);
        assert!((bounce_back(-1.4) - 0.6).abs() < 1e-12);
        assert_eq!(bounce_back(1.0), 1.0);
        assert_eq!(bounce_back(0.0), 0.0);
    }

    #[test]
    fn zero_sigma_keeps_genes() {
        let cfg = EncodingConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = Genome::random(&mut rng, &cfg);
        g.sigma = 0.0;
        for _ in 0..100 {
            let child = g.mutate(&mut rng);
            assert_eq!(child.genes, g.genes);
        }
    }

    #[test]
    fn type_gene_selects_joint_kind() {
        let cfg = EncodingConfig { n_joints: 2, ..Default::default() };
        let mut genes = alloc::vec![0.5; cfg.genome_len()];
        genes[7] = 0.10;
        genes[14] = 0.80;
        let l = Genome::new(genes, 0.1).decode(&cfg);
        assert!(matches!(l.joints[0], Joint::Extension { .. }));
        assert!(matches!(l.joints[1], Joint::TwoBeam { .. }));
    }

    #[test]
    fn centred_header_puts_statics_on_motor() {
        let cfg = EncodingConfig::default();
        let l = Genome::new(alloc::vec![0.5; cfg.genome_len()], 0.1).decode(&cfg);
        for s in l.static_nodes {
            assert_eq!(s, Point::ORIGIN);
        }
        assert_eq!(l.crank_length, 35.0);
    }

    #[test]
    fn duplicate_two_beam_parents_are_separated() {
        let cfg = EncodingConfig { n_joints: 1, ..Default::default() };
        let mut genes = alloc::vec![0.0; cfg.genome_len()];
        genes[7] = 0.9;
        genes[8] = 0.99; // a -> node 4
        genes[9] = 0.99; // b -> node 4 -> bumped to 0
        let l = Genome::new(genes, 0.1).decode(&cfg);
        match l.joints[0] {
            Joint::TwoBeam { parent_a, parent_b, .. } => {
                assert_eq!(parent_a, 4);
                assert_eq!(parent_b, 0);
            }
            _ => panic!("expected two-beam joint"),
        }
    }

    #[test]
    fn index_mapping_is_total() {
        for size in 1..20 {
            for k in 0..=1000 {
                let g = k as f64 / 1000.0;
                assert!(map_index(g, size) < size);
            }
        }
        assert_eq!(map_index(1.0, 5), 4);
        assert_eq!(map_index(0.0, 5), 0);
    }

    #[test]
    fn validate_rejects_bad_genomes() {
        let cfg = EncodingConfig::default();
        assert!(Genome::new(alloc::vec![0.5; 10], 0.1).validate(&cfg).is_err());
        let mut genes = alloc::vec![0.5; 63];
        genes[4] = 1.5;
        assert_eq!(Genome::new(genes, 0.1).validate(&cfg), Err(Error::GeneRange { index: 4, value: 1.5 }));
    }
}
