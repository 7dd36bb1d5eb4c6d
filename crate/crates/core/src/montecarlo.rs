//! Monte Carlo estimates of return probabilities with reproducible,
//! thread-count-independent sampling.
//!
//! Trials are split into fixed chunks of [`CHUNK_TRIALS`]. Chunk `i` draws
//! from ChaCha8 keyed by `SHA-256(seed_le ‖ i_le)`, so the hit count depends
//! only on `(walk, n, trials, seed)`. Steps are drawn by inverse CDF over
//! exact integer thresholds: with `D` the common denominator of the masses,
//! a uniform integer in `[0, D)` is compared against the cumulative
//! numerators, which reproduces every mass exactly.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rational::{common_denominator, to_f64};
use crate::returns::position_distribution;
use crate::walk::StepDistribution;

pub const CHUNK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error("simulation needs a proper walk (total mass one)")]
    NotProper,
    #[error("common denominator of the walk exceeds 2^128")]
    DenominatorTooLarge,
    #[error("could not start a pool of {0} worker threads")]
    ThreadPool(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationEstimate {
    pub n_steps: u32,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Exact inverse-CDF sampler over a proper walk.
#[derive(Debug, Clone)]
pub struct StepSampler {
    steps: Vec<i64>,
    /// Cumulative integer weights; the last entry is the denominator.
    cumulative: Vec<u128>,
}

impl StepSampler {
    pub fn new(w: &StepDistribution) -> Result<Self, SimulationError> {
        if !w.is_proper() {
            return Err(SimulationError::NotProper);
        }
        let den = common_denominator(w.entries().map(|(_, p)| p));
        let mut acc = 0u128;
        let mut steps = Vec::with_capacity(w.len());
        let mut cumulative = Vec::with_capacity(w.len());
        for (s, p) in w.entries() {
            let weight = (p * num_rational::BigRational::from_integer(den.clone()))
                .to_integer()
                .to_u128()
                .ok_or(SimulationError::DenominatorTooLarge)?;
            acc = acc
                .checked_add(weight)
                .ok_or(SimulationError::DenominatorTooLarge)?;
            steps.push(s);
            cumulative.push(acc);
        }
        Ok(Self { steps, cumulative })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> i64 {
        let den = *self.cumulative.last().expect("nonempty support");
        let u: u128 = rng.gen_range(0..den);
        self.steps[self.cumulative.partition_point(|&c| c <= u)]
    }

    pub fn walk<R: Rng>(&self, rng: &mut R, n: u32) -> i64 {
        (0..n).map(|_| self.sample(rng)).sum()
    }
}

/// RNG for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(chunk.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Runs `f(rng, trials_in_chunk)` on every chunk, returning results in chunk
/// order. `threads == 0` uses the ambient rayon pool.
fn run_chunks<T, F>(trials: u64, seed: u64, threads: usize, f: F) -> Result<Vec<T>, SimulationError>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let len = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
                f(&mut chunk_rng(seed, c), len)
            })
            .collect()
    };
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|_| SimulationError::ThreadPool(threads))?;
    Ok(pool.install(job))
}

pub fn simulate_return(
    w: &StepDistribution,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<SimulationEstimate, SimulationError> {
    simulate_return_with_threads(w, n, trials, seed, 0)
}

pub fn simulate_return_with_threads(
    w: &StepDistribution,
    n: u32,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<SimulationEstimate, SimulationError> {
    let sampler = StepSampler::new(w)?;
    let hits: u64 = run_chunks(trials, seed, threads, |rng, len| {
        (0..len).filter(|_| sampler.walk(rng, n) == 0).count() as u64
    })?
    .into_iter()
    .sum();
    let estimate = if trials == 0 {
        0.0
    } else {
        hits as f64 / trials as f64
    };
    let stderr = if trials == 0 {
        0.0
    } else {
        (estimate * (1.0 - estimate) / trials as f64).sqrt()
    };
    Ok(SimulationEstimate {
        n_steps: n,
        trials,
        hits,
        estimate,
        stderr,
        seed,
    })
}

/// Histogram of the n-step position over `trials` runs.
pub fn simulate_positions(
    w: &StepDistribution,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<i64, u64>, SimulationError> {
    let sampler = StepSampler::new(w)?;
    let parts = run_chunks(trials, seed, 0, |rng, len| {
        let mut h = BTreeMap::new();
        for _ in 0..len {
            *h.entry(sampler.walk(rng, n)).or_insert(0u64) += 1;
        }
        h
    })?;
    let mut hist = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *hist.entry(k).or_insert(0) += v;
        }
    }
    Ok(hist)
}

/// Total variation distance between an empirical histogram and the exact
/// n-step position distribution.
pub fn total_variation(w: &StepDistribution, n: u32, hist: &BTreeMap<i64, u64>) -> f64 {
    let trials: u64 = hist.values().sum();
    let exact = position_distribution(w, n);
    let mut keys: Vec<i64> = exact.mass.keys().chain(hist.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| {
            let p = to_f64(&exact.get(*k));
            let q = hist.get(k).copied().unwrap_or(0) as f64 / trials as f64;
            (p - q).abs()
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub estimate: SimulationEstimate,
    pub expected: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// z-test of an estimate against an expected probability; `0/0` passes.
pub fn consistency_against(
    estimate: SimulationEstimate,
    expected: f64,
    z_max: f64,
) -> ConsistencyReport {
    let diff = estimate.estimate - expected;
    let z_score = if estimate.stderr > 0.0 {
        diff / estimate.stderr
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    ConsistencyReport {
        pass: z_score.abs() <= z_max,
        estimate,
        expected,
        z_score,
    }
}

/// Simulates and compares against the exact `c_n`.
pub fn consistency_test(
    w: &StepDistribution,
    n: u32,
    trials: u64,
    seed: u64,
    z_max: f64,
) -> Result<ConsistencyReport, SimulationError> {
    let estimate = simulate_return(w, n, trials, seed)?;
    let exact = to_f64(&position_distribution(w, n).get(0));
    Ok(consistency_against(estimate, exact, z_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{lazy_walk, simple_walk};

    #[test]
    fn sampler_reproduces_masses_exactly() {
        let w = StepDistribution::from_fractions(&[(-2, 1, 6), (0, 1, 2), (3, 1, 3)]).unwrap();
        let s = StepSampler::new(&w).unwrap();
        assert_eq!(s.cumulative, vec![1, 4, 6]);
        assert_eq!(s.steps, vec![-2, 0, 3]);
    }

    #[test]
    fn subprobability_walks_are_rejected() {
        let w = StepDistribution::from_fractions(&[(1, 1, 4), (-1, 1, 4)]).unwrap();
        assert_eq!(
            StepSampler::new(&w).unwrap_err(),
            SimulationError::NotProper
        );
    }

    #[test]
    fn odd_steps_of_simple_walk_never_return() {
        let est = simulate_return(&simple_walk(), 3, 200_000, 9).unwrap();
        assert_eq!(est.hits, 0);
        assert_eq!(est.estimate, 0.0);
        let rep = consistency_test(&simple_walk(), 3, 200_000, 9, 4.0).unwrap();
        assert_eq!(rep.z_score, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn estimates_match_exact_values() {
        let rep = consistency_test(&simple_walk(), 2, 300_000, 1, 4.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = consistency_test(&lazy_walk(), 1, 300_000, 2, 4.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        let s = rep.estimate.stderr;
        let expected_stderr =
            (rep.estimate.estimate * (1.0 - rep.estimate.estimate) / 300_000.0).sqrt();
        assert_eq!(s, expected_stderr);
    }

    #[test]
    fn wrong_target_is_detected() {
        let est = simulate_return(&simple_walk(), 2, 300_000, 3).unwrap();
        let rep = consistency_against(est, 0.6, 4.0);
        assert!(!rep.pass && rep.z_score.abs() > 50.0);
    }

    #[test]
    fn chunking_is_thread_independent() {
        let a = simulate_return_with_threads(&lazy_walk(), 3, 150_000, 42, 1).unwrap();
        let b = simulate_return_with_threads(&lazy_walk(), 3, 150_000, 42, 4).unwrap();
        assert_eq!(a, b);
        let c = simulate_return_with_threads(&lazy_walk(), 3, 150_000, 43, 4).unwrap();
        assert_ne!(a.hits, c.hits);
    }

    #[test]
    fn chunk_streams_differ() {
        let mut a = chunk_rng(1, 0);
        let mut b = chunk_rng(1, 1);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }
}
