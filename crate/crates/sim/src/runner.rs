//! Trial scheduling.
//!
//! Each trial draws from its own `(seed, scenario, index)` stream and results
//! are gathered in index order, so output never depends on the worker count.

use rayon::prelude::*;

/// `f(i)` for every `i` in `range`, in parallel, returned in index order.
pub fn par_trials<T, F>(range: std::ops::Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

/// Runs `f` over consecutive batches of `batch` trials until `done` says
/// stop or `max` trials have run. Batches are the unit of the stop decision,
/// which keeps early stopping deterministic.
pub fn batched_until<T, F, D>(max: u64, batch: u64, f: F, mut done: D) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
    D: FnMut(&[T]) -> bool,
{
    let mut out = Vec::new();
    let mut start = 0;
    while start < max {
        let end = (start + batch.max(1)).min(max);
        out.extend(par_trials(start..end, &f));
        start = end;
        if done(&out) {
            break;
        }
    }
    out
}
