//! Data-parallel map helpers.
//!
//! Every per-pixel kernel in this crate goes through these helpers, so the
//! choice between the rayon pool and a plain loop is made in one place. Both
//! paths evaluate the same closure on the same inputs and collect in input
//! order, which keeps their outputs bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a kernel should be scheduled.
///
/// `Parallel` silently degrades to `Sequential` when the crate is built
/// without the `parallel` feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True if work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over consecutive `chunk`-sized windows of `data`.
pub fn map_chunks<T, U, F>(data: &[T], chunk: usize, exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&[T]) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return data.par_chunks_exact(chunk).map(f).collect();
    }
    let _ = exec;
    data.chunks_exact(chunk).map(f).collect()
}

/// Maps `f` over every element of `items`.
pub fn map_items<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`.
pub fn map_range<U, F>(n: usize, exec: Execution, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Folds `0..n` into a `u8` bit set with `f` producing the bit index for each item.
///
/// Used for "which labels occur" sweeps where materializing the labels would
/// cost far more than the classification itself.
pub fn label_set<F>(n: usize, exec: Execution, f: F) -> u8
where
    F: Fn(usize) -> u8 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n)
            .into_par_iter()
            .fold(|| 0u8, |acc, i| acc | (1 << f(i)))
            .reduce(|| 0u8, |a, b| a | b);
    }
    let _ = exec;
    (0..n).fold(0u8, |acc, i| acc | (1 << f(i)))
}

/// Sizes the global worker pool. Must run before the first parallel kernel;
/// a no-op without the `parallel` feature.
pub fn configure_threads(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Err(crate::Error::InvalidArgument(
            "thread count must be positive".into(),
        ));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    Ok(())
}
