//! Realizations fanned out over a rayon pool and folded back in stream
//! order.

use rayon::prelude::*;
use rrmdqw_core::{run_realization, EnsembleStats, RealizationResult, RunConfig, RunError};

/// Realizations kept in flight per worker thread.
const BATCH_PER_THREAD: u64 = 8;

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}

/// Applies `f` to every realization of `config`, returning results in
/// ascending stream order. `threads = None` uses the global rayon pool.
pub fn map_realizations<T, F>(config: &RunConfig, threads: Option<usize>, f: F) -> anyhow::Result<Vec<T>>
where
    T: Send,
    F: Fn(RealizationResult) -> T + Sync + Send,
{
    config.validate()?;
    let out = with_pool(threads, || {
        (0..config.n_realizations)
            .into_par_iter()
            .map(|s| run_realization(config, s).map(&f))
            .collect::<Result<Vec<T>, RunError>>()
    })??;
    Ok(out)
}

/// Same statistics as [`rrmdqw_core::run_ensemble`], bit for bit, for any
/// thread count.
pub fn run_ensemble_parallel(config: &RunConfig, threads: Option<usize>) -> anyhow::Result<EnsembleStats> {
    config.validate()?;
    let stats = with_pool(threads, || -> Result<EnsembleStats, RunError> {
        let batch = rayon::current_num_threads() as u64 * BATCH_PER_THREAD;
        let mut stats = EnsembleStats::empty(config);
        let mut start = 0;
        while start < config.n_realizations {
            let end = (start + batch).min(config.n_realizations);
            let results: Vec<RealizationResult> =
                (start..end).into_par_iter().map(|s| run_realization(config, s)).collect::<Result<_, _>>()?;
            for r in &results {
                stats.push(r);
            }
            start = end;
        }
        Ok(stats)
    })??;
    Ok(stats)
}
