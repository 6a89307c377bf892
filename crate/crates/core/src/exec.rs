//! Execution strategy for the data-parallel loops (model-selection grids,
//! restarts, Monte Carlo replicates).
//!
//! With the `parallel` feature (default) these run on rayon; without it they
//! fall back to plain sequential iteration. Results are collected in index
//! order, so both paths produce identical output.

/// True when the crate was built with the rayon-backed parallel path.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}
