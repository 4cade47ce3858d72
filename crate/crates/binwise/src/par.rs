//! Tiny dispatch layer between rayon and plain iteration.
//!
//! Every hot loop in the crate funnels through one of these helpers so the
//! `parallel` feature toggles execution strategy in exactly one place.
//! Merge functions must be associative and commutative; all call sites
//! combine counters or per-key sums, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fold `items` into an accumulator, merging partial results.
pub(crate) fn fold_slice<T, A, ID, F, M>(items: &[T], identity: ID, fold: F, merge: M) -> A
where
    T: Sync,
    A: Send,
    ID: Fn() -> A + Sync + Send,
    F: Fn(A, &T) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .fold(&identity, &fold)
            .reduce(&identity, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = &merge;
        items.iter().fold(identity(), fold)
    }
}

/// Map each index in `0..n` and merge the results.
pub(crate) fn map_reduce_range<A, F, ID, M>(n: usize, identity: ID, map: F, merge: M) -> A
where
    A: Send,
    ID: Fn() -> A + Sync + Send,
    F: Fn(usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(&map)
            .reduce(&identity, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(map).fold(identity(), merge)
    }
}

/// Map each index in `0..n`, preserving order of results.
pub(crate) fn map_collect_range<A, F>(n: usize, map: F) -> Vec<A>
where
    A: Send,
    F: Fn(usize) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(map).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(map).collect()
    }
}
