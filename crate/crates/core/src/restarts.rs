use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sub-seed for restart `index` of a sweep started from `seed` (SplitMix64).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of several independent restarts; `best` has the highest score,
/// ties going to the earliest restart.
#[derive(Debug, Clone)]
pub struct RestartSweep<T> {
    pub best: T,
    pub best_index: usize,
    pub scores: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// Runs `restarts` independent fits, in parallel when `threads != 1`
/// (`0` means one worker per core). Selection depends only on the per-restart
/// seeds, never on scheduling.
pub(crate) fn run_restarts<T, F, S>(
    restarts: usize,
    seed: u64,
    threads: usize,
    fit: F,
    score: S,
) -> Result<RestartSweep<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    S: Fn(&T) -> f64,
{
    if restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    let seeds: Vec<u64> = (0..restarts as u64).map(|r| derive_seed(seed, r)).collect();
    let runs: Vec<Result<T>> = if threads == 1 || restarts == 1 {
        seeds.iter().map(|&s| fit(s)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| seeds.par_iter().map(|&s| fit(s)).collect())
    };
    let runs = runs.into_iter().collect::<Result<Vec<T>>>()?;
    let scores: Vec<f64> = runs.iter().map(&score).collect();
    let mut best_index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best_index] || (scores[best_index].is_nan() && !s.is_nan()) {
            best_index = i;
        }
    }
    let best = runs.into_iter().nth(best_index).expect("nonempty");
    Ok(RestartSweep {
        best,
        best_index,
        scores,
        seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|r| derive_seed(7, r)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(a[3], derive_seed(7, 3));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn parallel_and_sequential_pick_the_same_run() {
        let fit = |s: u64| Ok::<_, Error>(s % 1000);
        let seq = run_restarts(32, 5, 1, fit, |&x| x as f64).unwrap();
        let par = run_restarts(32, 5, 4, fit, |&x| x as f64).unwrap();
        assert_eq!(seq.best_index, par.best_index);
        assert_eq!(seq.scores, par.scores);
    }

    #[test]
    fn ties_keep_the_first_restart() {
        let sweep = run_restarts(5, 1, 1, |_| Ok::<_, Error>(()), |_| 1.0).unwrap();
        assert_eq!(sweep.best_index, 0);
    }
}
