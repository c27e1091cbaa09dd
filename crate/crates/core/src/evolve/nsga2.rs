use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{best_raw, breed, master_rng, random_batch, BatchMap, Evaluation, IterationRecord, RunConfig, RunMeta};
use crate::fitness::FitnessKind;

/// `a` dominates `b` when it is at least as good on both objectives and
/// strictly better on one (maximisation).
pub fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1])
}

/// Non-dominated sorting for two maximised objectives.
///
/// Returns fronts as lists of input indices (ascending within a front),
/// best front first. Points are visited in order of decreasing first
/// objective; each joins the first front whose most recent member does not
/// dominate it, which is its Pareto rank because every dominator has been
/// visited before it.
pub fn nondominated_sort(points: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pb[0].partial_cmp(&pa[0]).unwrap_or(Ordering::Equal).then(pb[1].partial_cmp(&pa[1]).unwrap_or(Ordering::Equal))
    });
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut last: Vec<usize> = Vec::new();
    for i in order {
        let rank = last.iter().position(|&q| !dominates(&points[q], &points[i])).unwrap_or(fronts.len());
        if rank == fronts.len() {
            fronts.push(Vec::new());
            last.push(i);
        }
        fronts[rank].push(i);
        last[rank] = i;
    }
    for f in &mut fronts {
        f.sort_unstable();
    }
    fronts
}

/// Crowding distance of every member of one front. Boundary members and
/// fronts of two or fewer get `+∞`; ties in an objective keep input order.
pub fn crowding_distance(front: &[[f64; 2]]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut dist = vec![0.0; n];
    for m in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][m].partial_cmp(&front[b][m]).unwrap_or(Ordering::Equal));
        let lo = front[order[0]][m];
        let hi = front[order[n - 1]][m];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range > 0.0 {
            for w in 1..n - 1 {
                dist[order[w]] += (front[order[w + 1]][m] - front[order[w - 1]][m]) / range;
            }
        }
    }
    dist
}

/// Picks `n` indices ordered by (front rank ascending, crowding
/// descending).
pub fn nsga2_select(points: &[[f64; 2]], n: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(n);
    for front in nondominated_sort(points) {
        if chosen.len() >= n {
            break;
        }
        let objs: Vec<[f64; 2]> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&objs);
        let mut ranked: Vec<usize> = (0..front.len()).collect();
        ranked.sort_by(|&a, &b| crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal));
        chosen.extend(ranked.into_iter().take(n - chosen.len()).map(|k| front[k]));
    }
    chosen
}

/// Area dominated by `points` (maximisation) and bounded below by
/// `reference`.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points.iter().copied().filter(|p| p[0] > reference[0] && p[1] > reference[1]).collect();
    pts.sort_by(|a, b| b[0].partial_cmp(&a[0]).unwrap_or(Ordering::Equal).then(b[1].partial_cmp(&a[1]).unwrap_or(Ordering::Equal)));
    let mut area = 0.0;
    let mut y = reference[1];
    for p in pts {
        if p[1] > y {
            area += (p[0] - reference[0]) * (p[1] - y);
            y = p[1];
        }
    }
    area
}

#[derive(Debug, Clone)]
pub struct Nsga2Result {
    pub population: Vec<Evaluation>,
    /// Non-dominated members of the final population.
    pub front: Vec<Evaluation>,
    /// Objective scores (higher is better) of the first front after each
    /// iteration, starting with the initial population.
    pub front_log: Vec<Vec<[f64; 2]>>,
    pub log: Vec<IterationRecord>,
    pub meta: RunMeta,
}

fn objective_scores(kind: FitnessKind, evals: &[Evaluation]) -> Vec<[f64; 2]> {
    evals
        .iter()
        .map(|e| {
            let o = e.objectives.expect("multi-objective evaluation");
            [kind.score(o[0]), kind.score(o[1])]
        })
        .collect()
}

/// NSGA-II with (μ+λ) survivor selection over the whole population.
pub fn run_nsga2<E: BatchMap>(cfg: &RunConfig, exec: &E) -> Nsga2Result {
    run_nsga2_observed(cfg, exec, |_, _| {})
}

/// [`run_nsga2`], calling `observe` with each iteration's population.
pub fn run_nsga2_observed<E, F>(cfg: &RunConfig, exec: &E, mut observe: F) -> Nsga2Result
where
    E: BatchMap,
    F: FnMut(&IterationRecord, &[Evaluation]),
{
    let mut rng = master_rng(cfg.seed);
    let mut evaluator = cfg.evaluator();
    evaluator.multiobjective = true;
    let init = random_batch(&mut rng, cfg.batch_size, &cfg.encoding);
    let mut population = exec.map(&init, |g| evaluator.evaluate(g, None));
    let mut evaluations = population.len();
    let mut log = Vec::with_capacity(cfg.iterations + 1);
    let mut front_log = Vec::with_capacity(cfg.iterations + 1);

    let mut record = |iteration: usize, evaluations: usize, population: &[Evaluation]| {
        let objs = objective_scores(cfg.fitness, population);
        let first: Vec<[f64; 2]> = nondominated_sort(&objs).into_iter().next().unwrap_or_default().into_iter().map(|i| objs[i]).collect();
        log.push(IterationRecord {
            iteration,
            evaluations,
            best_fitness: best_raw(cfg.fitness, population),
            coverage: None,
            qd_score: None,
            front_size: Some(first.len()),
        });
        observe(log.last().unwrap(), population);
        front_log.push(first);
    };
    record(0, evaluations, &population);

    for iteration in 1..=cfg.iterations {
        let parents: Vec<_> = population.iter().map(|e| &e.genome).collect();
        let children = breed(exec, &mut rng, &parents, &evaluator, None);
        evaluations += children.len();
        let mut pool = population;
        pool.extend(children);
        let objs = objective_scores(cfg.fitness, &pool);
        let keep = nsga2_select(&objs, cfg.batch_size);
        population = keep.into_iter().map(|i| pool[i].clone()).collect();
        record(iteration, evaluations, &population);
    }

    let objs = objective_scores(cfg.fitness, &population);
    let front = nondominated_sort(&objs).into_iter().next().unwrap_or_default().into_iter().map(|i| population[i].clone()).collect();
    Nsga2Result { population, front, front_log, log, meta: cfg.meta(cfg.iterations, evaluations) }
}
