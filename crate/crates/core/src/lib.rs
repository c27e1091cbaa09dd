//! Planar leg-linkage simulation and quality-diversity evolution.
//!
//! This crate is `no_std` and only needs `alloc`. It holds the genome
//! encoding, the kinematic solver, the fitness functions, the behaviour
//! descriptors (hand-crafted and autoencoder-learned), the three evolution
//! loops (tournament EA, NSGA-II and MAP-Elites), and the pure parts of
//! repertoire browsing (downsampling and brick build sheets).
//!
//! Everything that touches files, threads or the network lives in the
//! companion `linkevo` crate.
#![no_std]

extern crate alloc;

pub mod aurora;
pub mod descriptors;
pub mod evolve;
pub mod fitness;
pub mod genome;
pub mod geometry;
pub mod kinematics;
pub mod prototyping;

mod error;

pub use error::Error;
pub use genome::{EncodingConfig, Genome, LengthRange};
pub use geometry::Point;
pub use kinematics::{Linkage, PathTrace};
