//! Batch execution helpers.
//!
//! Trial suites and batch decompositions map an index range through a pure
//! function and collect the results in index order. With the `parallel`
//! feature (on by default) the map runs on the rayon thread pool; results are
//! still collected in index order, so output is identical to the sequential
//! path bit for bit as long as `f` itself is deterministic per index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `0..n` through `f`, in parallel when the `parallel` feature is on.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference for [`map_collect`], kept unconditionally so the
/// bench suite can compare the two under either feature set.
pub fn map_collect_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps a slice through `f`, in parallel when the `parallel` feature is on.
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
