use alloc::vec::Vec;

use rand::Rng;

use super::{best_raw, breed, master_rng, random_batch, BatchMap, Evaluation, IterationRecord, RunConfig, RunMeta, SurvivorPool};
use crate::fitness::FitnessKind;

#[derive(Debug, Clone)]
pub struct EaResult {
    pub population: Vec<Evaluation>,
    pub log: Vec<IterationRecord>,
    pub meta: RunMeta,
}

/// `n` size-`k` tournaments drawn with replacement from `pool`. Ties go to
/// the contestant drawn first.
pub fn tournament_select<R: Rng + ?Sized>(pool: &[Evaluation], n: usize, k: usize, kind: FitnessKind, rng: &mut R) -> Vec<Evaluation> {
    (0..n)
        .map(|_| {
            let mut winner = rng.random_range(0..pool.len());
            for _ in 1..k {
                let c = rng.random_range(0..pool.len());
                if kind.score(pool[c].fitness) > kind.score(pool[winner].fitness) {
                    winner = c;
                }
            }
            pool[winner].clone()
        })
        .collect()
}

/// Standard evolutionary algorithm: the whole population is mutated, and
/// survivors are picked by tournament.
pub fn run_ea<E: BatchMap>(cfg: &RunConfig, exec: &E) -> EaResult {
    run_ea_observed(cfg, exec, |_, _| {})
}

/// [`run_ea`], calling `observe` with each iteration's population.
pub fn run_ea_observed<E, F>(cfg: &RunConfig, exec: &E, mut observe: F) -> EaResult
where
    E: BatchMap,
    F: FnMut(&IterationRecord, &[Evaluation]),
{
    let mut rng = master_rng(cfg.seed);
    let evaluator = cfg.evaluator();
    let init = random_batch(&mut rng, cfg.batch_size, &cfg.encoding);
    let mut population = exec.map(&init, |g| evaluator.evaluate(g, None));
    let mut evaluations = population.len();
    let mut log = Vec::with_capacity(cfg.iterations + 1);
    log.push(IterationRecord {
        iteration: 0,
        evaluations,
        best_fitness: best_raw(cfg.fitness, &population),
        coverage: None,
        qd_score: None,
        front_size: None,
    });
    observe(&log[0], &population);
    for iteration in 1..=cfg.iterations {
        let parents: Vec<_> = population.iter().map(|e| &e.genome).collect();
        let children = breed(exec, &mut rng, &parents, &evaluator, None);
        evaluations += children.len();
        let pool = match cfg.survivor_pool {
            SurvivorPool::Union => {
                let mut pool = population;
                pool.extend(children);
                pool
            }
            SurvivorPool::Children => children,
        };
        population = tournament_select(&pool, cfg.batch_size, cfg.tournament_size, cfg.fitness, &mut rng);
        log.push(IterationRecord {
            iteration,
            evaluations,
            best_fitness: best_raw(cfg.fitness, &population),
            coverage: None,
            qd_score: None,
            front_size: None,
        });
        observe(&log[iteration], &population);
    }
    EaResult { population, log, meta: cfg.meta(cfg.iterations, evaluations) }
}
