//! Fixed-order fan-out used by every Monte Carlo and per-order loop.

use alloc::vec::Vec;

/// Evaluates `f(0..count)` and returns the results in index order, on the
/// rayon pool when the `parallel` feature is on.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Pairwise tree reduction; the association order depends only on the
/// length of the input.
pub(crate) fn tree_reduce<T: Copy>(items: &[T], identity: T, op: &impl Fn(T, T) -> T) -> T {
    match items.len() {
        0 => identity,
        1 => items[0],
        len => {
            let (lo, hi) = items.split_at(len / 2);
            op(tree_reduce(lo, identity, op), tree_reduce(hi, identity, op))
        }
    }
}
