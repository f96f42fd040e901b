//! Parallel trial execution with a deterministic reduction.

use rayon::prelude::*;

use crate::{Error, Result};

/// Runs `trial(i)` for `i in 0..trials` on `threads` workers (0 = rayon's
/// default) and returns the outputs in trial order.
///
/// Each trial derives its randomness from its own index, and results are
/// collected by index, so the output does not depend on scheduling.
pub fn monte_carlo<T, F>(trials: usize, threads: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let run = || (0..trials as u64).into_par_iter().map(&trial).collect::<Result<Vec<T>>>();
    if threads == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(run)
    }
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl Summary {
    /// Welford accumulation in iteration order; `None` when empty.
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Option<Self> {
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in values {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        if n == 0 {
            return None;
        }
        let stderr = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { count: n, mean, stderr })
    }
}
