//! Execution strategy for the data-parallel inner loops.
//!
//! Weight-table construction, weight application over all target nodes and
//! dense sampling are embarrassingly parallel. With the `parallel` feature
//! (on by default) they run on the rayon pool; without it, or when
//! [`Execution::Sequential`] is requested, they run on the calling thread.
//! Both paths evaluate every element with identical arithmetic, so results
//! are bit-identical.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon global pool; identical to `Sequential` when the crate
    /// is built without the `parallel` feature.
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
    /// Evaluates `f` on every index of `range`, preserving order.
    pub fn map_range<T, F>(self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Fallible variant of [`Execution::map_range`]; returns the error of the
    /// lowest failing index.
    pub fn try_map_range<T, E, F>(self, range: Range<usize>, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                let results: Vec<Result<T, E>> = range.into_par_iter().map(f).collect();
                results.into_iter().collect()
            }
            _ => range.map(f).collect(),
        }
    }
}

/// Caps the size of the global worker pool. Returns `false` when the pool
/// was already initialised (or the crate is built without `parallel`).
pub fn init_thread_pool(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin().powf(1.3);
        let a = Execution::Sequential.map_range(0..1000, f);
        let b = Execution::Parallel.map_range(0..1000, f);
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel
                .try_map_range(0..100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
