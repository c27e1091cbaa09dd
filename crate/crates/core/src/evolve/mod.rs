//! The three optimisation loops. Each iteration creates children by
//! mutating a batch of parents, evaluates them (in parallel through a
//! [`BatchMap`]) and selects survivors.
//!
//! Randomness: the run seed drives one master stream. Each child gets its
//! own stream seeded from the master, drawn serially before the batch is
//! dispatched, so results do not depend on how jobs are scheduled.

mod archive;
mod ea;
mod evaluate;
mod exec;
mod map_elites;
mod nsga2;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use archive::{qd_floor, Repertoire, RunMeta};
pub use ea::{run_ea, run_ea_observed, tournament_select, EaResult};
pub use evaluate::{latent_descriptor, Evaluation, Evaluator, PathSummary};
pub use exec::{BatchMap, Serial};
pub use map_elites::{aurora_schedule, rebin, retrain, run_map_elites, run_map_elites_observed, MapElitesResult};
pub use nsga2::{crowding_distance, dominates, hypervolume_2d, nondominated_sort, nsga2_select, run_nsga2, run_nsga2_observed, Nsga2Result};

use crate::aurora::AuroraConfig;
use crate::descriptors::{DescriptorSpace, GridSpec};
use crate::fitness::{FitnessKind, TargetPointSet};
use crate::genome::{EncodingConfig, Genome};
use crate::Error;

pub type Rng64 = ChaCha8Rng;

/// Population / batch size used throughout.
pub const DEFAULT_BATCH: usize = 5000;
pub const DEFAULT_STEPS: usize = 72;
pub const TOURNAMENT_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ea,
    Nsga2,
    #[serde(rename = "me")]
    MapElites,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ea => "ea",
            Algorithm::Nsga2 => "nsga2",
            Algorithm::MapElites => "me",
        }
    }
}

/// Pool the EA tournament draws survivors from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivorPool {
    /// Parents and children together (μ+λ).
    #[default]
    Union,
    /// Children only (μ,λ).
    Children,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub fitness: FitnessKind,
    /// Descriptor space, MAP-Elites only.
    pub space: DescriptorSpace,
    pub batch_size: usize,
    /// Iterations after the initial batch; evaluations = batch · (1 + iterations).
    pub iterations: usize,
    pub seed: u64,
    pub steps: usize,
    pub encoding: EncodingConfig,
    pub targets: TargetPointSet,
    /// Overrides the space's default grid (ignored for the learned space,
    /// whose bounds come from the autoencoder).
    pub grid: Option<GridSpec>,
    pub tournament_size: usize,
    pub survivor_pool: SurvivorPool,
    pub aurora: AuroraConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::MapElites,
            fitness: FitnessKind::Fp,
            space: DescriptorSpace::Lis,
            batch_size: DEFAULT_BATCH,
            iterations: 0,
            seed: 0,
            steps: DEFAULT_STEPS,
            encoding: EncodingConfig::default(),
            targets: TargetPointSet::default(),
            grid: None,
            tournament_size: TOURNAMENT_SIZE,
            survivor_pool: SurvivorPool::Union,
            aurora: AuroraConfig::default(),
        }
    }
}

impl RunConfig {
    /// Sets the iteration count from a total evaluation budget (rounded
    /// down to whole batches, at least the initial batch).
    pub fn with_budget(mut self, evaluations: usize) -> Self {
        self.iterations = (evaluations / self.batch_size.max(1)).saturating_sub(1);
        self
    }

    pub fn evaluations(&self) -> usize {
        self.batch_size * (1 + self.iterations)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.encoding.validate()?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.steps < 3 {
            return Err(Error::Config("steps must be at least 3".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament_size must be positive".into()));
        }
        if self.targets.step_points.is_empty() || self.targets.lift_points.is_empty() {
            return Err(Error::Config("target point sets must be non-empty".into()));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
            if g.dims.len() != self.space.dims() {
                return Err(Error::Config("grid dimensions do not match the descriptor space".into()));
            }
        }
        Ok(())
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator {
            encoding: self.encoding,
            steps: self.steps,
            fitness: self.fitness,
            targets: self.targets.clone(),
            multiobjective: self.algorithm == Algorithm::Nsga2,
            space: (self.algorithm == Algorithm::MapElites).then_some(self.space),
        }
    }

    pub fn meta(&self, iterations: usize, evaluations: usize) -> RunMeta {
        RunMeta {
            algorithm: self.algorithm,
            fitness: self.fitness,
            space: (self.algorithm == Algorithm::MapElites).then_some(self.space),
            seed: self.seed,
            iterations,
            evaluations,
            steps: self.steps,
            encoding: self.encoding,
            targets: self.targets.clone(),
        }
    }

    pub fn qd_floor(&self) -> f64 {
        qd_floor(self.fitness, self.targets.len(), self.steps)
    }
}

/// One line of the per-iteration metrics log. Iteration 0 is the initial
/// batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub evaluations: usize,
    /// Best raw scalar fitness present after this iteration; `None` while
    /// a repertoire is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qd_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_size: Option<usize>,
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Ea(EaResult),
    Nsga2(Nsga2Result),
    MapElites(MapElitesResult),
}

impl RunOutcome {
    pub fn log(&self) -> &[IterationRecord] {
        match self {
            RunOutcome::Ea(r) => &r.log,
            RunOutcome::Nsga2(r) => &r.log,
            RunOutcome::MapElites(r) => &r.log,
        }
    }
}

/// Runs the configured algorithm.
pub fn run<E: BatchMap>(cfg: &RunConfig, exec: &E) -> Result<RunOutcome, Error> {
    cfg.validate()?;
    Ok(match cfg.algorithm {
        Algorithm::Ea => RunOutcome::Ea(run_ea(cfg, exec)),
        Algorithm::Nsga2 => RunOutcome::Nsga2(run_nsga2(cfg, exec)),
        Algorithm::MapElites => RunOutcome::MapElites(run_map_elites(cfg, exec)),
    })
}

pub(crate) fn master_rng(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

pub(crate) fn random_batch(rng: &mut Rng64, n: usize, cfg: &EncodingConfig) -> Vec<Genome> {
    (0..n).map(|_| Genome::random(rng, cfg)).collect()
}

/// Mutates each parent with its own pre-drawn stream and evaluates the
/// children.
pub(crate) fn breed<E: BatchMap>(
    exec: &E,
    rng: &mut Rng64,
    parents: &[&Genome],
    evaluator: &Evaluator,
    ae: Option<&crate::aurora::Autoencoder>,
) -> Vec<Evaluation> {
    let jobs: Vec<(&Genome, u64)> = parents.iter().map(|&g| (g, rng.random::<u64>())).collect();
    exec.map(&jobs, |&(parent, seed)| {
        let child = parent.mutate(&mut Rng64::seed_from_u64(seed));
        evaluator.evaluate(&child, ae)
    })
}

pub(crate) fn best_raw(kind: FitnessKind, evals: &[Evaluation]) -> Option<f64> {
    evals
        .iter()
        .map(|e| e.fitness)
        .fold(None, |acc: Option<f64>, f| match acc {
            Some(a) if kind.score(a) >= kind.score(f) => Some(a),
            _ => Some(f),
        })
}
