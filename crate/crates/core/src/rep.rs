//! Weight decompositions of finite-dimensional U(1) representations and
//! their correspondence with walks.
//!
//! A representation `V ≅ ⊕ V_n^{α_n}` gives the walk `a_n = α_n / N` with
//! `N = dim V`, and `dim (V^{⊗n})^{U(1)}` is the constant coefficient of
//! `(Σ α_k t^k)^n`, i.e. `N^n c_n`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::rational::{common_denominator, gcd_all};
use crate::reconstruct::{best_fit, ReconstructionProblem};
use crate::returns::return_sequence;
use crate::walk::StepDistribution;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepError {
    #[error("weight {0} listed more than once")]
    DuplicateWeight(i64),
    #[error("representation has dimension zero")]
    ZeroDimension,
    #[error("walk is not a probability distribution")]
    NotProper,
    #[error("invariant dimension d_{index} = {value} is negative")]
    NegativeDimension { index: usize, value: String },
    #[error("need at least {needed} invariant dimensions for weight bound {bound}, got {got}")]
    TooFewDims {
        needed: usize,
        got: usize,
        bound: u64,
    },
    #[error("no dimension N in [{lower}, {upper}] reproduces the invariant dimensions")]
    NoConsistentDimension { lower: String, upper: String },
    #[error("the dimension bracket [{lower}, {upper}] is empty; no representation with weights in the bound fits")]
    AmbiguousWithoutBound { lower: String, upper: String },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeightDecomposition {
    mult: BTreeMap<i64, u64>,
    dim: u64,
}

impl WeightDecomposition {
    /// Zero multiplicities are dropped; repeated weights are rejected.
    pub fn new<I: IntoIterator<Item = (i64, u64)>>(entries: I) -> Result<Self, RepError> {
        let mut mult = BTreeMap::new();
        for (weight, m) in entries {
            if m == 0 {
                continue;
            }
            if mult.insert(weight, m).is_some() {
                return Err(RepError::DuplicateWeight(weight));
            }
        }
        let dim = mult.values().sum();
        if dim == 0 {
            return Err(RepError::ZeroDimension);
        }
        Ok(Self { mult, dim })
    }

    /// Self-dual decomposition from `α_0, α_1, ..., α_m` (weights `±k`).
    pub fn self_dual(half: &[u64]) -> Result<Self, RepError> {
        Self::new(half.iter().enumerate().flat_map(|(k, &m)| {
            let k = k as i64;
            let mirror = (k > 0).then_some((-k, m));
            std::iter::once((k, m)).chain(mirror)
        }))
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn multiplicity(&self, weight: i64) -> u64 {
        self.mult.get(&weight).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.mult.iter().map(|(w, m)| (*w, *m))
    }

    pub fn max_weight(&self) -> u64 {
        self.mult
            .keys()
            .map(|w| w.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    fn character(&self) -> LaurentPoly<BigInt> {
        LaurentPoly::from_terms(self.entries().map(|(w, m)| (w, BigInt::from(m))))
    }
}

impl fmt::Debug for WeightDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.mult.iter()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RepProperties {
    /// `α_n = α_{-n}` for all `n`.
    pub self_dual: bool,
    /// Nonzero weights generate the integers.
    pub faithful: bool,
}

pub fn validate_rep(r: &WeightDecomposition) -> RepProperties {
    RepProperties {
        self_dual: r.entries().all(|(w, m)| r.multiplicity(-w) == m),
        faithful: gcd_all(r.mult.keys().copied()) == 1,
    }
}

/// The walk `a_n = α_n / N`.
pub fn rep_to_walk(r: &WeightDecomposition) -> StepDistribution {
    let n = BigInt::from(r.dim);
    StepDistribution::new(
        r.entries()
            .map(|(w, m)| (w, BigRational::new(BigInt::from(m), n.clone()))),
    )
    .expect("multiplicities form a probability distribution")
}

/// Smallest representation whose walk is `w`: `N` is the least common
/// denominator of the masses.
pub fn walk_to_rep(w: &StepDistribution) -> Result<WeightDecomposition, RepError> {
    if !w.is_proper() {
        return Err(RepError::NotProper);
    }
    let n = common_denominator(w.entries().map(|(_, p)| p));
    WeightDecomposition::new(w.entries().map(|(s, p)| {
        let m = (p * BigRational::from_integer(n.clone())).to_integer();
        (s, m.to_u64().expect("multiplicity fits in u64"))
    }))
}

/// `d_n = dim (V^{⊗n})^{U(1)}` for `n = 1..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantDimensionSequence {
    pub dims: Vec<BigInt>,
}

impl InvariantDimensionSequence {
    pub fn new(dims: Vec<BigInt>) -> Result<Self, RepError> {
        if let Some((i, d)) = dims.iter().enumerate().find(|(_, d)| d.is_negative()) {
            return Err(RepError::NegativeDimension {
                index: i + 1,
                value: d.to_string(),
            });
        }
        Ok(Self { dims })
    }

    pub fn from_u64(dims: &[u64]) -> Self {
        Self {
            dims: dims.iter().map(|&d| BigInt::from(d)).collect(),
        }
    }

    /// `d_n` for `1 ≤ n ≤ len()`.
    pub fn get(&self, n: usize) -> Option<&BigInt> {
        n.checked_sub(1).and_then(|i| self.dims.get(i))
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

/// Constant terms of the powers of the character `Σ α_k t^k`, in integers.
pub fn invariant_dims(r: &WeightDecomposition, k: u32) -> InvariantDimensionSequence {
    let dims = r
        .character()
        .powers()
        .take(k as usize)
        .map(|p| p.constant_term())
        .collect();
    InvariantDimensionSequence { dims }
}

/// Checks `d_n = N^n c_n` exactly against the exact return engine.
pub fn dimension_identity_holds(
    r: &WeightDecomposition,
    dims: &InvariantDimensionSequence,
) -> bool {
    let seq = return_sequence(&rep_to_walk(r), dims.len() as u32);
    let n = BigInt::from(r.dim);
    let mut n_pow = BigInt::one();
    dims.dims.iter().zip(&seq.values).all(|(d, c)| {
        n_pow *= &n;
        let scaled = c * BigRational::from_integer(n_pow.clone());
        scaled.is_integer() && scaled.to_integer() == *d
    })
}

/// `⌈d^{1/n}⌉` for `d ≥ 0`.
fn ceil_root(d: &BigInt, n: u32) -> BigInt {
    let r = d.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) < *d {
        r + 1
    } else {
        r
    }
}

/// Integer bracket `[lower, upper]` that must contain `N` when the dims come
/// from a self-dual representation with weights in `[-bound, bound]`.
///
/// `lower` uses `d_n ≤ N^n`. `upper` uses the lower bound
/// `c_{2n} ≥ (1 - σ²/n²)/(2n² + 1)` with `σ² ≤ bound²`, over every usable
/// `n > bound` with `2n ≤ K`.
pub fn dimension_bracket(dims: &InvariantDimensionSequence, bound: u64) -> (BigInt, BigInt) {
    let lower = dims
        .dims
        .iter()
        .enumerate()
        .map(|(i, d)| ceil_root(d, i as u32 + 1))
        .fold(BigInt::one(), |a, b| a.max(b));
    let m2 = BigInt::from(bound) * BigInt::from(bound);
    let upper = (bound as usize + 1..=dims.len() / 2)
        .map(|n| {
            let d2n = &dims.dims[2 * n - 1];
            let nn = BigInt::from(n) * BigInt::from(n);
            // N^{2n} ≤ d_{2n} (2n² + 1) n² / (n² - bound²)
            let numer = d2n * (BigInt::from(2) * &nn + 1) * &nn;
            let q: BigInt = numer / (&nn - &m2);
            q.nth_root(2 * n as u32)
        })
        .min()
        .unwrap_or_else(BigInt::zero);
    (lower, upper)
}

/// Recovers the self-dual faithful decomposition behind `dims`, assuming
/// every weight lies in `[-bound, bound]`.
///
/// Every `N` in [`dimension_bracket`] is tried in increasing order: the walk
/// is fitted to `c_n = d_n / N^n`, `N a_k` is rounded to integers, and the
/// candidate is kept only if it reproduces `dims` exactly.
pub fn dims_to_rep(
    dims: &InvariantDimensionSequence,
    bound: u64,
) -> Result<WeightDecomposition, RepError> {
    let needed = 2 * bound as usize + 4;
    if bound == 0 || dims.len() < needed {
        return Err(RepError::TooFewDims {
            needed,
            got: dims.len(),
            bound,
        });
    }
    let (lower, upper) = dimension_bracket(dims, bound);
    if lower > upper {
        return Err(RepError::AmbiguousWithoutBound {
            lower: lower.to_string(),
            upper: upper.to_string(),
        });
    }
    let candidates: Vec<u64> = match (lower.to_u64(), upper.to_u64()) {
        (Some(lo), Some(hi)) => (lo..=hi).collect(),
        _ => Vec::new(),
    };
    candidates
        .into_par_iter()
        .find_map_first(|n| try_dimension(dims, bound, n))
        .ok_or_else(|| RepError::NoConsistentDimension {
            lower: lower.to_string(),
            upper: upper.to_string(),
        })
}

fn try_dimension(
    dims: &InvariantDimensionSequence,
    bound: u64,
    n: u64,
) -> Option<WeightDecomposition> {
    let big_n = BigInt::from(n);
    let mut n_pow = BigInt::one();
    let targets: Vec<BigRational> = dims
        .dims
        .iter()
        .map(|d| {
            n_pow *= &big_n;
            BigRational::new(d.clone(), n_pow.clone())
        })
        .collect();
    let problem = ReconstructionProblem::new(targets, bound as usize, 1e-8);
    let fit = best_fit(&problem).ok()?;
    let half: Option<Vec<u64>> = fit
        .params
        .iter()
        .map(|&a| {
            let scaled = a * n as f64;
            let rounded = scaled.round();
            ((scaled - rounded).abs() <= 1e-6 && rounded >= 0.0).then_some(rounded as u64)
        })
        .collect();
    let rep = WeightDecomposition::self_dual(&half?).ok()?;
    (rep.dim() == n
        && validate_rep(&rep).faithful
        && invariant_dims(&rep, dims.len() as u32) == *dims)
        .then_some(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{lazy_walk, simple_walk};

    fn rep(entries: &[(i64, u64)]) -> WeightDecomposition {
        WeightDecomposition::new(entries.iter().copied()).unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigInt> {
        v.iter().map(|&d| BigInt::from(d)).collect()
    }

    /// Independent oracle: expand `(Σ α_k x^k)^n` by enumerating ordered
    /// weight tuples and count those summing to zero.
    fn tuple_count(r: &WeightDecomposition, n: usize) -> u64 {
        let entries: Vec<(i64, u64)> = r.entries().collect();
        fn go(entries: &[(i64, u64)], left: usize, sum: i64) -> u64 {
            if left == 0 {
                return u64::from(sum == 0);
            }
            entries
                .iter()
                .map(|&(w, m)| m * go(entries, left - 1, sum + w))
                .sum()
        }
        go(&entries, n, 0)
    }

    #[test]
    fn validate_examples() {
        assert_eq!(
            validate_rep(&rep(&[(-1, 1), (0, 1), (1, 1)])),
            RepProperties {
                self_dual: true,
                faithful: true
            }
        );
        assert_eq!(
            validate_rep(&rep(&[(-2, 1), (2, 1)])),
            RepProperties {
                self_dual: true,
                faithful: false
            }
        );
        assert_eq!(
            validate_rep(&rep(&[(-1, 1), (1, 2)])),
            RepProperties {
                self_dual: false,
                faithful: true
            }
        );
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            WeightDecomposition::new([(1, 1), (1, 2)]),
            Err(RepError::DuplicateWeight(1))
        );
        assert_eq!(
            WeightDecomposition::new([(1, 0)]),
            Err(RepError::ZeroDimension)
        );
    }

    #[test]
    fn rep_to_walk_examples() {
        let w = rep_to_walk(&rep(&[(-1, 1), (0, 1), (1, 1)]));
        assert_eq!(
            w,
            StepDistribution::from_fractions(&[(-1, 1, 3), (0, 1, 3), (1, 1, 3)]).unwrap()
        );
        assert_eq!(rep_to_walk(&rep(&[(-1, 1), (1, 1)])), simple_walk());
        assert_eq!(rep_to_walk(&rep(&[(-1, 1), (0, 2), (1, 1)])), lazy_walk());
    }

    #[test]
    fn walk_to_rep_inverts_with_minimal_dimension() {
        let r = walk_to_rep(&lazy_walk()).unwrap();
        assert_eq!(r, rep(&[(-1, 1), (0, 2), (1, 1)]));
        let sub = StepDistribution::from_fractions(&[(1, 1, 3)]).unwrap();
        assert_eq!(walk_to_rep(&sub), Err(RepError::NotProper));
    }

    #[test]
    fn invariant_dims_examples() {
        let tri = rep(&[(-1, 1), (0, 1), (1, 1)]);
        assert_eq!(invariant_dims(&tri, 4).dims, big(&[1, 3, 7, 19]));
        let bin = rep(&[(-1, 1), (1, 1)]);
        assert_eq!(invariant_dims(&bin, 4).dims, big(&[0, 2, 0, 6]));
        let r = rep(&[(-3, 2), (0, 4), (2, 1), (3, 2)]);
        assert_eq!(invariant_dims(&r, 1).dims, big(&[4]));
        for n in 1..=5 {
            assert_eq!(
                invariant_dims(&r, 5).dims[n - 1],
                BigInt::from(tuple_count(&r, n))
            );
        }
        assert!(dimension_identity_holds(&r, &invariant_dims(&r, 8)));
    }

    #[test]
    fn dims_to_rep_examples() {
        let tri = InvariantDimensionSequence::from_u64(&[1, 3, 7, 19, 51, 141]);
        assert_eq!(
            dims_to_rep(&tri, 1).unwrap(),
            rep(&[(-1, 1), (0, 1), (1, 1)])
        );
        let bin = InvariantDimensionSequence::from_u64(&[0, 2, 0, 6, 0, 20]);
        assert_eq!(dims_to_rep(&bin, 1).unwrap(), rep(&[(-1, 1), (1, 1)]));
        let bad = InvariantDimensionSequence::from_u64(&[1, 3, 7, 19, 52, 141]);
        assert!(matches!(
            dims_to_rep(&bad, 1),
            Err(RepError::NoConsistentDimension { .. })
        ));
    }

    #[test]
    fn dims_to_rep_preconditions() {
        let short = InvariantDimensionSequence::from_u64(&[1, 3, 7]);
        assert!(matches!(
            dims_to_rep(&short, 1),
            Err(RepError::TooFewDims { .. })
        ));
        let zeros = InvariantDimensionSequence::from_u64(&[0, 0, 0, 0, 0, 0]);
        assert!(matches!(
            dims_to_rep(&zeros, 1),
            Err(RepError::AmbiguousWithoutBound { .. })
        ));
        assert!(InvariantDimensionSequence::new(vec![BigInt::from(-1)]).is_err());
    }

    #[test]
    fn bracket_contains_true_dimension() {
        let tri = InvariantDimensionSequence::from_u64(&[1, 3, 7, 19, 51, 141]);
        let (lo, hi) = dimension_bracket(&tri, 1);
        assert!(lo <= BigInt::from(3) && BigInt::from(3) <= hi);
    }
}
