use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use super::{breed, master_rng, random_batch, BatchMap, Evaluation, Evaluator, IterationRecord, Repertoire, Rng64, RunConfig};
use crate::aurora::{latent_grid, AuroraConfig, Autoencoder, PathVector};
use crate::descriptors::{Descriptor, DescriptorSpace, GridSpec};

#[derive(Debug, Clone)]
pub struct MapElitesResult {
    pub repertoire: Repertoire,
    pub log: Vec<IterationRecord>,
    /// Trained network, for the learned descriptor space.
    pub autoencoder: Option<Autoencoder>,
}

/// MAP-Elites: a random bootstrap batch seeds the grid; every iteration
/// mutates a batch of elites picked uniformly (with replacement) and offers
/// the children to their cells in child order.
pub fn run_map_elites<E: BatchMap>(cfg: &RunConfig, exec: &E) -> MapElitesResult {
    run_map_elites_observed(cfg, exec, |_, _| {})
}

/// [`run_map_elites`], calling `observe` after the bootstrap and after
/// every iteration.
pub fn run_map_elites_observed<E, F>(cfg: &RunConfig, exec: &E, mut observe: F) -> MapElitesResult
where
    E: BatchMap,
    F: FnMut(&IterationRecord, &Repertoire),
{
    let mut rng = master_rng(cfg.seed);
    let evaluator = cfg.evaluator();
    let init = random_batch(&mut rng, cfg.batch_size, &cfg.encoding);
    let mut evaluations = init.len();

    let (mut rep, mut ae) = if cfg.space == DescriptorSpace::Au {
        let (rep, ae) = bootstrap_aurora(cfg, &evaluator, exec, &mut rng, &init);
        (rep, Some(ae))
    } else {
        let grid = cfg.grid.clone().unwrap_or_else(|| cfg.space.default_grid(&cfg.encoding));
        let mut rep = Repertoire::new(grid, cfg.meta(0, evaluations));
        for e in exec.map(&init, |g| evaluator.evaluate(g, None)) {
            rep.insert_elite(e);
        }
        (rep, None)
    };

    let floor = cfg.qd_floor();
    let mut log = Vec::with_capacity(cfg.iterations + 1);
    let record = |iteration: usize, evaluations: usize, rep: &Repertoire| IterationRecord {
        iteration,
        evaluations,
        best_fitness: rep.best().map(|e| e.fitness),
        coverage: Some(rep.coverage()),
        qd_score: Some(rep.qd_score(floor)),
        front_size: None,
    };
    log.push(record(0, evaluations, &rep));
    observe(&log[0], &rep);

    for iteration in 1..=cfg.iterations {
        let elites: Vec<&Evaluation> = rep.elites().collect();
        let fresh;
        let parents: Vec<_> = if elites.is_empty() {
            fresh = random_batch(&mut rng, cfg.batch_size, &cfg.encoding);
            fresh.iter().collect()
        } else {
            (0..cfg.batch_size).map(|_| &elites[rng.random_range(0..elites.len())].genome).collect()
        };
        let children = breed(exec, &mut rng, &parents, &evaluator, ae.as_ref());
        evaluations += children.len();
        for child in children {
            rep.insert_elite(child);
        }
        if let Some(net) = ae.as_mut() {
            aurora_schedule(&mut rep, net, iteration, &cfg.aurora, &evaluator, exec, &mut rng);
        }
        rep.meta.iterations = iteration;
        rep.meta.evaluations = evaluations;
        log.push(record(iteration, evaluations, &rep));
        observe(&log[iteration], &rep);
    }
    rep.meta.iterations = cfg.iterations;
    rep.meta.evaluations = evaluations;
    MapElitesResult { repertoire: rep, log, autoencoder: ae }
}

fn bootstrap_aurora<E: BatchMap>(
    cfg: &RunConfig,
    evaluator: &Evaluator,
    exec: &E,
    rng: &mut Rng64,
    init: &[crate::genome::Genome],
) -> (Repertoire, Autoencoder) {
    let mut net_rng = Rng64::seed_from_u64(rng.random());
    let mut ae = Autoencoder::new(&mut net_rng);
    let evaluated = exec.map(init, |g| evaluator.evaluate_with_vector(g, None));
    let data: Vec<PathVector> = evaluated.iter().filter_map(|(_, v)| v.clone()).collect();
    if data.is_empty() {
        log::warn!("no error-free paths in the bootstrap batch; autoencoder left untrained");
    } else {
        ae.train(&data, cfg.aurora.bootstrap_epochs, &cfg.aurora.train, &mut net_rng);
    }
    let latents: Vec<Option<Vec<f64>>> = exec.map(&evaluated, |(_, v)| v.as_ref().map(|v| ae.encode(&v.0)));
    let valid: Vec<Vec<f64>> = latents.iter().flatten().cloned().collect();
    let grid = latent_grid(&valid, ae.latent_dims(), cfg.aurora.bins);
    let mut rep = Repertoire::new(grid, cfg.meta(0, init.len()));
    for ((mut e, _), z) in evaluated.into_iter().zip(latents) {
        if let Some(z) = z {
            e.descriptor = Some(Descriptor::new(DescriptorSpace::Au, z));
            rep.insert_elite(e);
        }
    }
    (rep, ae)
}

/// Periodic retraining of the learned descriptor space. Returns whether a
/// retraining happened at this iteration.
pub fn aurora_schedule<E: BatchMap>(
    rep: &mut Repertoire,
    ae: &mut Autoencoder,
    iteration: usize,
    cfg: &AuroraConfig,
    evaluator: &Evaluator,
    exec: &E,
    rng: &mut Rng64,
) -> bool {
    if !cfg.retrains_at(iteration) {
        return false;
    }
    retrain(rep, ae, cfg.retrain_epochs, cfg, evaluator, exec, rng)
}

/// Trains on the current elites' paths, then (if `cfg.rebin`) recomputes
/// latent bounds and re-inserts every elite into a fresh grid.
pub fn retrain<E: BatchMap>(
    rep: &mut Repertoire,
    ae: &mut Autoencoder,
    epochs: usize,
    cfg: &AuroraConfig,
    evaluator: &Evaluator,
    exec: &E,
    rng: &mut Rng64,
) -> bool {
    let genomes: Vec<_> = rep.elites().map(|e| e.genome.clone()).collect();
    let data: Vec<PathVector> = exec.map(&genomes, |g| evaluator.path_vector(g)).into_iter().flatten().collect();
    let mut net_rng = Rng64::seed_from_u64(rng.random());
    if data.is_empty() {
        log::warn!("no error-free paths in the repertoire; skipping autoencoder training");
        return false;
    }
    ae.train(&data, epochs, &cfg.train, &mut net_rng);
    if cfg.rebin {
        let latents: Vec<Vec<f64>> = exec.map(&data, |v| ae.encode(&v.0));
        let grid = latent_grid(&latents, ae.latent_dims(), cfg.bins);
        *rep = rebin(rep, ae, grid, evaluator, exec);
    }
    true
}

/// Re-encodes every elite and inserts it into an empty repertoire over
/// `grid`; when two elites collide the better one is kept.
pub fn rebin<E: BatchMap>(rep: &Repertoire, ae: &Autoencoder, grid: GridSpec, evaluator: &Evaluator, exec: &E) -> Repertoire {
    let elites: Vec<&Evaluation> = rep.elites().collect();
    let latents = exec.map(&elites, |e| evaluator.path_vector(&e.genome).map(|v| ae.encode(&v.0)));
    let mut out = Repertoire::new(grid, rep.meta.clone());
    for (e, z) in elites.into_iter().zip(latents) {
        if let Some(z) = z {
            let mut e = e.clone();
            e.descriptor = Some(Descriptor::new(DescriptorSpace::Au, z));
            out.insert_elite(e);
        }
    }
    out
}
