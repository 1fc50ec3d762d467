//! Process-wide thread pool for pairwise test parallelism.
//!
//! `GRANGER_THREADS` caps the worker count; unset or invalid values fall
//! back to the rayon default. Results never depend on the pool size: work
//! items are indexed and merged in deterministic order.

use once_cell::sync::Lazy;
use rayon::ThreadPool;

static POOL: Lazy<ThreadPool> = Lazy::new(|| {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("GRANGER_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .expect("failed to build the worker thread pool")
});

/// Runs `f` inside the shared pool so nested rayon iterators use it.
pub fn run<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    POOL.install(f)
}
