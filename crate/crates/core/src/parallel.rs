//! Thin switch between rayon data-parallel iteration and a sequential
//! fallback.
//!
//! With the default `parallel` feature the mapping fans out over the rayon
//! thread pool; without it the same call runs on the current thread. Both
//! paths return results in input order, so callers observe identical output
//! regardless of the execution mode or worker count.

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Fold `f` over `0..n` into per-worker accumulators and merge them.
///
/// `merge` must be commutative and associative for the result to be
/// independent of the worker count; the quantum-jump ensemble satisfies this
/// by accumulating integer event counts only.
#[cfg(feature = "parallel")]
pub fn fold_indexed<A, F, M>(n: usize, identity: impl Fn() -> A + Sync + Send, f: F, merge: M) -> A
where
    A: Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .fold(&identity, &f)
        .reduce(&identity, merge)
}

/// Fold `f` over `0..n` into per-worker accumulators and merge them.
#[cfg(not(feature = "parallel"))]
pub fn fold_indexed<A, F, M>(n: usize, identity: impl Fn() -> A + Sync + Send, f: F, merge: M) -> A
where
    A: Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let _ = merge;
    (0..n).fold(identity(), f)
}

/// Configure the global worker pool size. `None` keeps the default.
///
/// Affects throughput only; results are independent of the worker count by
/// construction. Calling this more than once is a no-op after the first
/// successful configuration.
#[cfg(feature = "parallel")]
pub fn configure_threads(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Configure the global worker pool size. `None` keeps the default.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_workers: Option<usize>) {}
