use alloc::vec::Vec;

/// Order-preserving map over a batch of independent jobs.
///
/// Implementations may run jobs concurrently but must return results in
/// input order, so that everything downstream is independent of
/// scheduling.
pub trait BatchMap {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl BatchMap for Serial {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}
