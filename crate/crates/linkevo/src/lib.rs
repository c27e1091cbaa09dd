//! Standard-library side of linkevo: archive and checkpoint files, run
//! configuration, a thread-pool executor, SVG rendering and the HTTP API.

pub mod archive;
pub mod checkpoint;
pub mod config;
pub mod exec;
pub mod metrics;
pub mod server;
pub mod svg;
pub mod targets;

mod error;

pub use error::Error;
pub use linkevo_core as core;
