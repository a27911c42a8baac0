//! Data-parallel execution helpers.
//!
//! The crate's heavy loops (Monte-Carlo trials, per-mode time convolutions,
//! parameter sweeps) are embarrassingly parallel. With the default `parallel`
//! feature they run on the rayon global pool; without it they fall back to a
//! plain sequential loop. `map_indexed_seq` is always available so benchmarks
//! can compare both paths within one build.

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

/// Sequential reference path for the same mapping.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Caps the rayon pool at `threads` workers. No-op without the `parallel`
/// feature or if a global pool already exists.
pub fn limit_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
