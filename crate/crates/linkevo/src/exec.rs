//! Thread-pool implementation of [`BatchMap`].

use linkevo_core::evolve::BatchMap;
use rayon::prelude::*;

use crate::Error;

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "LINKEVO_WORKERS";

/// Evaluates batches on a dedicated rayon pool. Results come back in input
/// order, so a run's output does not depend on the worker count.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(workers: usize) -> Result<Self, Error> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("linkevo-worker-{i}"))
            .build()
            .map_err(|e| Error::Format(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    /// Worker count from [`WORKERS_ENV`]; unset or `0` means one worker
    /// per available core.
    pub fn from_env() -> Result<Self, Error> {
        Self::new(workers_from_env()?)
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

pub fn workers_from_env() -> Result<usize, Error> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("{WORKERS_ENV} must be a non-negative integer, got {v:?}"))),
        _ => Ok(0),
    }
}

impl BatchMap for Pool {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}
