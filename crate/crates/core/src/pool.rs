//! Replica-level worker pool.
//!
//! Replicas are keyed by index and results come back in index order, so any
//! reduction over them is independent of the worker count.

use rayon::prelude::*;

use crate::error::{domain, Result};

pub fn replica_map<T, F>(workers: usize, count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers == 0 {
        return Err(domain("worker count must be positive"));
    }
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}
