//! Sequential / data-parallel execution of independent evaluations.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch of independent evaluations is executed.
///
/// Results are always returned in input order, so both strategies produce
/// identical output for pure closures.
/// The default is parallel when the `parallel` feature is enabled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, range: Range<usize>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => range.map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => range.into_par_iter().map(f).collect(),
        }
    }

    /// Index of the smallest value produced by `cost` over `range`.
    ///
    /// Ties resolve to the lowest index and NaN costs are never selected.
    pub fn argmin<F>(self, range: Range<usize>, cost: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let pick = |a: Option<(usize, f64)>, b: Option<(usize, f64)>| match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        let lift = |i: usize| {
            let c = cost(i);
            (!c.is_nan()).then_some((i, c))
        };
        match self {
            Execution::Sequential => range.map(lift).fold(None, pick),
            #[cfg(feature = "parallel")]
            Execution::Parallel => range.into_par_iter().map(lift).reduce(|| None, pick),
        }
    }
}
