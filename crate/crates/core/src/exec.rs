//! Data-parallel execution helpers.
//!
//! Every parallel loop in the crate is an order-preserving map, so results are
//! identical whichever [`Execution`] mode runs them. Floating-point reductions
//! are always done sequentially over the mapped output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map over a slice.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(mode: Execution, items: &[T], func: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        Execution::Parallel => items.par_iter().map(func).collect(),
        Execution::Sequential => items.iter().map(func).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(_mode: Execution, items: &[T], func: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(func).collect()
}

/// Order-preserving map over `0..n`.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(mode: Execution, n: usize, func: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        Execution::Parallel => (0..n).into_par_iter().map(func).collect(),
        Execution::Sequential => (0..n).map(func).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(_mode: Execution, n: usize, func: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(func).collect()
}

/// Runs `op` on a pool limited to `threads` workers (0 = rayon default).
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(op),
        Err(err) => {
            log::warn!("could not build a {threads}-thread pool ({err}); using the global pool");
            op()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: usize, op: impl FnOnce() -> R + Send) -> R {
    op()
}
