//! Execution policy for the data-parallel loops (scenario sweeps, trial
//! batches, strategy enumeration).
//!
//! Every parallel map returns its results in input order and all reductions
//! over floating point values happen sequentially afterwards, so the chosen
//! policy never changes a result, only the wall time.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items a parallel request still runs sequentially.
pub const MIN_PARALLEL_ITEMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to sequential execution.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= MIN_PARALLEL_ITEMS {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && len >= MIN_PARALLEL_ITEMS {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Integer sum of `f` over `items`; order-independent, so safe to split.
    pub fn sum_u64<T, F>(self, items: &[T], f: F) -> u64
    where
        T: Sync,
        F: Fn(&T) -> u64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= MIN_PARALLEL_ITEMS {
            return items.par_iter().map(f).sum();
        }
        items.iter().map(f).sum()
    }
}
