//! Execution helpers: rayon when the `parallel` feature is on, plain loops
//! otherwise. All helpers produce results indexed by the input range, so the
//! two builds are bit-identical.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sum `f(i)` over `0..n` with a fixed reduction order: the per-index values
/// are materialized first, then summed sequentially. Callers keep `f` cheap
/// relative to the work it wraps (typically a row of a pairwise loop).
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(n, f).iter().sum()
}

/// First index in `0..n` satisfying `pred`, honoring index order.
#[cfg(feature = "parallel")]
pub fn find_first_indexed<F>(n: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().find_first(|&i| pred(i))
}

#[cfg(not(feature = "parallel"))]
pub fn find_first_indexed<F>(n: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    (0..n).find(|&i| pred(i))
}
