//! Indexed map over `0..count`, parallel when the `parallel` feature is on.
//!
//! Results are collected in index order, so callers observe the same output
//! regardless of thread count.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(count: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if jobs == 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    if jobs == 0 {
        // rayon's global pool
        return (0..count).into_par_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("failed to build thread pool");
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(count: usize, _jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}
