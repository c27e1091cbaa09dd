#![allow(dead_code)]

use linkevo::archive::Archive;
use linkevo_core::descriptors::DescriptorSpace;
use linkevo_core::evolve::{run_ea, run_map_elites, run_nsga2, Algorithm, BatchMap, RunConfig, Serial};

pub fn small(algorithm: Algorithm, space: DescriptorSpace, seed: u64) -> RunConfig {
    let mut cfg = RunConfig { algorithm, space, batch_size: 200, iterations: 3, seed, steps: 36, ..RunConfig::default() };
    cfg.aurora.bootstrap_epochs = 20;
    cfg.aurora.retrain_epochs = 10;
    cfg.aurora.retrain_interval = 2;
    cfg
}

/// Runs `cfg` and packs the result as it would be saved by the CLI.
pub fn archive_of<E: BatchMap>(cfg: &RunConfig, exec: &E) -> Archive {
    match cfg.algorithm {
        Algorithm::Ea => {
            let r = run_ea(cfg, exec);
            Archive::from_population(&r.meta, &r.population)
        }
        Algorithm::Nsga2 => {
            let r = run_nsga2(cfg, exec);
            Archive::from_population(&r.meta, &r.population)
        }
        Algorithm::MapElites => Archive::from_repertoire(&run_map_elites(cfg, exec).repertoire, None),
    }
}

pub fn me_archive(space: DescriptorSpace, seed: u64) -> Archive {
    archive_of(&small(Algorithm::MapElites, space, seed), &Serial)
}

pub fn bytes(a: &Archive) -> Vec<u8> {
    let mut out = Vec::new();
    a.write(&mut out).unwrap();
    out
}
