//! Data-parallel evaluation of independent jobs (sweep points, random
//! instances) with a sequential fallback.
//!
//! With the `parallel` feature (on by default) jobs run on the rayon pool;
//! either way results come back in input order.

/// How a batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Use the rayon pool when the `parallel` feature is enabled, otherwise
    /// run sequentially.
    #[default]
    Auto,
    Sequential,
}

impl Execution {
    /// Whether jobs will actually run in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Auto
    }
}

/// Apply `f` to every item, keeping input order in the output.
pub fn map<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
