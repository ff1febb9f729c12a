//! Path sampling with ordered aggregation.
//!
//! Paths are identified by their index; path `i` always uses the random
//! stream `(master_seed, i)`. Workers may finish in any order, but results
//! are consumed strictly by ascending index, so every decision depends only
//! on the master seed and never on the number of threads.

use rayon::prelude::*;

use crate::error::SmcError;
use crate::monitor::DEFAULT_CHECK_BOUND;

pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub master_seed: u64,
    pub threads: usize,
    /// Candidate recomputation period C_b.
    pub check_bound: u64,
    /// Per-path step cap; exceeding it aborts the whole run.
    pub max_steps: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 0,
            threads: 1,
            check_bound: DEFAULT_CHECK_BOUND,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        RunConfig {
            master_seed: seed,
            ..Self::default()
        }
    }
}

/// Running path-length statistics over consumed samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LengthStats {
    pub n: u64,
    pub total: u128,
    pub max: u64,
}

impl LengthStats {
    pub fn push(&mut self, len: u64) {
        self.n += 1;
        self.total += u128::from(len);
        self.max = self.max.max(len);
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.total as f64 / self.n as f64
        }
    }
}

/// Samples paths `0, 1, 2, ...` and hands each result to `consume` in index
/// order until it returns `true`. Returns the number of consumed samples.
///
/// `init` builds per-worker scratch state (typically a reusable tracker).
pub fn run_until<W, T, I, S, C>(threads: usize, init: I, sample: S, mut consume: C) -> Result<u64, SmcError>
where
    I: Fn() -> W + Sync + Send,
    S: Fn(&mut W, u64) -> Result<T, SmcError> + Sync + Send,
    T: Send,
    C: FnMut(u64, T) -> bool,
{
    if threads <= 1 {
        let mut scratch = init();
        let mut i = 0u64;
        loop {
            let x = sample(&mut scratch, i)?;
            if consume(i, x) {
                return Ok(i + 1);
            }
            i += 1;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SmcError::InvalidParameter(format!("thread pool: {e}")))?;
    let batch = threads as u64 * 16;
    let mut start = 0u64;
    loop {
        let results: Vec<Result<T, SmcError>> = pool.install(|| {
            (start..start + batch)
                .into_par_iter()
                .map_init(&init, |w, i| sample(w, i))
                .collect()
        });
        for (offset, r) in results.into_iter().enumerate() {
            let i = start + offset as u64;
            if consume(i, r?) {
                return Ok(i + 1);
            }
        }
        start += batch;
    }
}

/// Samples exactly `n` paths and returns their results in index order.
pub fn run_fixed<W, T, I, S>(threads: usize, n: u64, init: I, sample: S) -> Result<Vec<T>, SmcError>
where
    I: Fn() -> W + Sync + Send,
    S: Fn(&mut W, u64) -> Result<T, SmcError> + Sync + Send,
    T: Send,
{
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(n as usize);
    run_until(threads, init, sample, |i, x| {
        out.push(x);
        i + 1 == n
    })?;
    Ok(out)
}
