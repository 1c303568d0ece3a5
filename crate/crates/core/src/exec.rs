//! Sequential / rayon execution switch for the index-parallel loops.
//!
//! Every parallel loop in the crate is a map over an index range whose body
//! only depends on the index, so both strategies return identical vectors.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to [`Exec::Sequential`] when the `parallel` feature is off.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `range` in index order. `init` builds a per-worker
    /// scratch value that `f` may reuse between indices.
    pub fn map_init<S, T, I, F>(self, range: Range<u64>, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return range.into_par_iter().map_init(init, f).collect();
        }
        let mut scratch = init();
        range.map(|i| f(&mut scratch, i)).collect()
    }

    pub fn map<T, F>(self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.map_init(range, || (), |_, i| f(i))
    }
}
