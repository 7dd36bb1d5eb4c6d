//! Reference walks and deterministic pseudo-random families of walks and
//! representations, used by tests, benchmarks and the acceptance suite.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rep::WeightDecomposition;
use crate::walk::StepDistribution;

/// Simple walk: `±1` with probability `1/2` each.
pub fn simple_walk() -> StepDistribution {
    StepDistribution::from_fractions(&[(-1, 1, 2), (1, 1, 2)]).expect("valid walk")
}

/// Lazy walk: stay with probability `1/2`, `±1` with `1/4` each.
pub fn lazy_walk() -> StepDistribution {
    StepDistribution::from_fractions(&[(0, 1, 2), (-1, 1, 4), (1, 1, 4)]).expect("valid walk")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkFamily {
    /// Largest step size drawn.
    pub max_step: u64,
    /// Upper bound on `a_0 + 2 Σ w_k`, hence on every denominator.
    pub max_denominator: u64,
    /// Fraction of draws (in percent) forced to have only odd steps.
    pub odd_only_percent: u32,
}

impl WalkFamily {
    pub const fn new(max_step: u64, max_denominator: u64) -> Self {
        Self {
            max_step,
            max_denominator,
            odd_only_percent: 30,
        }
    }
}

/// One symmetric, primitive, proper walk with integer weights `w_k` on `±k`
/// normalized by `w_0 + 2 Σ_{k≥1} w_k`.
pub fn random_walk<R: Rng>(rng: &mut R, family: WalkFamily) -> StepDistribution {
    loop {
        let m = rng.gen_range(1..=family.max_step) as usize;
        let odd_only = rng.gen_range(0..100) < family.odd_only_percent;
        let cap = (family.max_denominator / 2).clamp(1, 6);
        let mut half: Vec<u64> = (0..=m)
            .map(|k| {
                if odd_only && k % 2 == 0 {
                    0
                } else {
                    rng.gen_range(0..=cap)
                }
            })
            .collect();
        if half[m] == 0 {
            half[m] = rng.gen_range(1..=cap);
        }
        let total: u64 = half[0] + 2 * half[1..].iter().sum::<u64>();
        if total == 0 || total > family.max_denominator {
            continue;
        }
        let steps = half
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &w)| w > 0)
            .map(|(k, _)| k as i64);
        if crate::rational::gcd_all(steps) != 1 {
            continue;
        }
        let masses: Vec<BigRational> = half
            .iter()
            .map(|&w| BigRational::new(w.into(), total.into()))
            .collect();
        return StepDistribution::symmetric(&masses).expect("weights form a distribution");
    }
}

/// `count` walks from a fixed seed.
pub fn walk_corpus(seed: u64, count: usize, family: WalkFamily) -> Vec<StepDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_walk(&mut rng, family)).collect()
}

/// A self-dual, faithful decomposition with weights in `[-max_weight,
/// max_weight]` and multiplicities at most `max_mult`.
pub fn random_rep<R: Rng>(rng: &mut R, max_weight: u64, max_mult: u64) -> WeightDecomposition {
    loop {
        let m = rng.gen_range(1..=max_weight) as usize;
        let half: Vec<u64> = (0..=m)
            .map(|k| {
                // Leave some weights out so that sparse supports appear.
                if k > 0 && rng.gen_bool(0.3) {
                    0
                } else {
                    rng.gen_range(if k == 0 { 0 } else { 1 }..=max_mult)
                }
            })
            .collect();
        let Ok(rep) = WeightDecomposition::self_dual(&half) else {
            continue;
        };
        if crate::rep::validate_rep(&rep).faithful {
            return rep;
        }
    }
}

pub fn rep_corpus(
    seed: u64,
    count: usize,
    max_weight: u64,
    max_mult: u64,
) -> Vec<WeightDecomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_rep(&mut rng, max_weight, max_mult))
        .collect()
}
