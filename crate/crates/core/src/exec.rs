//! Pluggable execution of independent jobs.
//!
//! The core never spawns threads. Callers that want parallelism implement
//! [`Executor`] on top of their own pool; results are always collected in
//! index order, so output does not depend on the executor.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `job(0..n)` and returns the results in index order.
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(job).collect()
    }
}
