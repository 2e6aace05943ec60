//! Execution of independent, indexed work items.
//!
//! Results always come back in index order, so any reduction done by the
//! caller over the returned vector is independent of the number of worker
//! threads.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent work items are scheduled. Without the `parallel`
/// feature both variants run on the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Evaluates `f(0), …, f(n − 1)`, stopping at the first error.
pub fn map_indexed<T, F>(n: usize, execution: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn preserves_order() {
        let f = |i: usize| Ok((i as f64).sqrt());
        let par = map_indexed(1000, Execution::Parallel, f).unwrap();
        let seq = map_indexed(1000, Execution::Sequential, f).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn propagates_errors() {
        let out = map_indexed(10, Execution::Parallel, |i| {
            if i == 7 {
                Err(Error::Numerical("boom".into()))
            } else {
                Ok(i)
            }
        });
        assert!(out.is_err());
    }
}
