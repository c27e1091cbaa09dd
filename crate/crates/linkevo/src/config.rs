//! TOML run configuration.
//!
//! ```toml
//! algorithm = "me"      # ea | nsga2 | me
//! fitness = "fp"        # fp | fsl
//! space = "lis"         # wh | lis | st | au
//! budget = 50000        # total evaluations, including the initial batch
//! seed = 1
//! targets = "targets.csv"
//!
//! [encoding]
//! n_joints = 8
//!
//! [[grid.dims]]
//! lo = 0.0
//! hi = 300.0
//! bins = 100
//! ```
//!
//! Every key is optional; missing keys take the defaults of
//! [`RunConfig`]. `budget` and `iterations` are mutually exclusive.

use std::path::{Path, PathBuf};

use linkevo_core::aurora::AuroraConfig;
use linkevo_core::descriptors::{DescriptorSpace, GridSpec};
use linkevo_core::evolve::{Algorithm, RunConfig, SurvivorPool};
use linkevo_core::fitness::FitnessKind;
use linkevo_core::EncodingConfig;
use serde::{Deserialize, Serialize};

use crate::targets::load_targets;
use crate::Error;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub algorithm: Option<Algorithm>,
    pub fitness: Option<FitnessKind>,
    pub space: Option<DescriptorSpace>,
    pub budget: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub batch_size: Option<usize>,
    pub steps: Option<usize>,
    pub tournament_size: Option<usize>,
    pub survivor_pool: Option<SurvivorPool>,
    pub encoding: Option<EncodingConfig>,
    pub grid: Option<GridSpec>,
    pub aurora: Option<AuroraConfig>,
    /// Target point file, relative to the config file.
    pub targets: Option<PathBuf>,
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let mut file = Self::parse(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if let (Some(t), Some(dir)) = (&file.targets, path.parent()) {
            file.targets = Some(dir.join(t));
        }
        Ok(file)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: RunFile) -> RunFile {
        RunFile {
            algorithm: other.algorithm.or(self.algorithm),
            fitness: other.fitness.or(self.fitness),
            space: other.space.or(self.space),
            budget: other.budget.or(if other.iterations.is_some() { None } else { self.budget }),
            iterations: other.iterations.or(if other.budget.is_some() { None } else { self.iterations }),
            seed: other.seed.or(self.seed),
            batch_size: other.batch_size.or(self.batch_size),
            steps: other.steps.or(self.steps),
            tournament_size: other.tournament_size.or(self.tournament_size),
            survivor_pool: other.survivor_pool.or(self.survivor_pool),
            encoding: other.encoding.or(self.encoding),
            grid: other.grid.or(self.grid),
            aurora: other.aurora.or(self.aurora),
            targets: other.targets.or(self.targets),
        }
    }

    pub fn to_config(&self) -> Result<RunConfig, Error> {
        if self.budget.is_some() && self.iterations.is_some() {
            return Err(Error::Format("set either budget or iterations, not both".into()));
        }
        let d = RunConfig::default();
        let mut cfg = RunConfig {
            algorithm: self.algorithm.unwrap_or(d.algorithm),
            fitness: self.fitness.unwrap_or(d.fitness),
            space: self.space.unwrap_or(d.space),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed.unwrap_or(d.seed),
            steps: self.steps.unwrap_or(d.steps),
            encoding: self.encoding.unwrap_or(d.encoding),
            targets: match &self.targets {
                Some(path) => load_targets(path)?,
                None => d.targets,
            },
            grid: self.grid.clone(),
            tournament_size: self.tournament_size.unwrap_or(d.tournament_size),
            survivor_pool: self.survivor_pool.unwrap_or(d.survivor_pool),
            aurora: self.aurora.unwrap_or(d.aurora),
        };
        if let Some(budget) = self.budget {
            if budget < cfg.batch_size {
                return Err(Error::Format(format!("budget {budget} is smaller than one batch ({})", cfg.batch_size)));
            }
            cfg = cfg.with_budget(budget);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
