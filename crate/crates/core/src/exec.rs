//! Sequential or data-parallel evaluation of independent jobs.
//!
//! Results always come back in index order, so the output of a sweep does not
//! depend on how the work was scheduled.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    /// Runs on the current rayon pool; identical to `Sequential` when the
    /// crate is built without the `parallel` feature.
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

/// `(0..n).map(f)` collected in order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (the global pool when
/// `None`). Without the `parallel` feature `f` simply runs inline.
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> std::io::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(std::io::Error::other)?;
        return Ok(pool.install(f));
    }
    let _ = threads;
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(1000, Execution::Sequential, |i| i * i);
        let par = map_indexed(1000, Execution::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn dedicated_pool() {
        let v = with_threads(Some(2), || map_indexed(10, Execution::Parallel, |i| i + 1)).unwrap();
        assert_eq!(v, (1..=10).collect::<Vec<_>>());
    }
}
