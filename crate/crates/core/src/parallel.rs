//! Worker pool used to sieve tiles concurrently.
//!
//! With the `parallel` feature the pool is a dedicated rayon pool; without it
//! (or with a single worker) tiles run sequentially on the calling thread. In
//! both cases results come back in index order, so callers merge
//! deterministically regardless of the worker count.

use std::ops::Range;

/// Worker count used when none is configured.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub struct WorkerPool {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        #[cfg(feature = "parallel")]
        {
            let pool = if workers > 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("sieve-worker-{i}"))
                    .build()
                    .ok()
            } else {
                None
            };
            Self { workers, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self { workers }
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Whether work is actually spread across threads.
    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Applies `f` to every index, returning results in index order.
    pub fn map_ordered<T, F>(&self, indices: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| indices.into_par_iter().map(&f).collect());
        }
        indices.map(f).collect()
    }
}
