//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) work is spread over the rayon
//! pool; without it, or with [`Exec::Sequential`], the same closures run in
//! order. Results are always collected in index order so the caller's
//! reduction never depends on scheduling.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for the inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Map `f` over an integer range, returning results in range order.
pub fn map_range<T, F>(exec: Exec, range: Range<i64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(i64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Map `f` over a slice, returning results in slice order.
pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Run `f` on a pool with `workers` threads (0 means the default pool).
///
/// Worker count only changes speed; every reduction in this crate is ordered
/// by work-item index.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(f);
        }
    }
    let _ = workers;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_order_is_preserved() {
        let par = map_range(Exec::Parallel, -50..50, |i| i * i);
        let seq = map_range(Exec::Sequential, -50..50, |i| i * i);
        assert_eq!(par, seq);
        assert_eq!(par[0], 2500);
    }

    #[test]
    fn workers_pool_runs_closure() {
        let v = with_workers(2, || map_slice(Exec::Parallel, &[1.0f64, 2.0, 3.0], |x| x * 2.0));
        assert_eq!(v, vec![2.0, 4.0, 6.0]);
    }
}
