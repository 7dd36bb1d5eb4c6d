//! Exact n-step position distributions and return probabilities.
//!
//! The n-th return probability is the constant coefficient of
//! `(Σ a_k t^k)^n`. Powers are taken over the integers after clearing
//! denominators, then divided back out, which keeps every value exact while
//! avoiding a gcd reduction per multiply.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cancel::{CancelToken, Cancelled};
use crate::laurent::LaurentPoly;
use crate::rational::{format_rational, ln_rational};
use crate::walk::StepDistribution;

/// Distribution `r_{n,k} = Pr[x_1 + ... + x_n = k]` of the position after
/// `n_steps` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    pub n_steps: u32,
    pub mass: BTreeMap<i64, BigRational>,
}

impl PositionDistribution {
    pub fn get(&self, position: i64) -> BigRational {
        self.mass
            .get(&position)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.mass.values().sum()
    }

    /// `Σ_k r_{n,k}^2`, which equals `c_{2n}` for symmetric walks.
    pub fn sum_of_squares(&self) -> BigRational {
        self.mass.values().map(|r| r * r).sum()
    }

    fn from_scaled(n_steps: u32, poly: &LaurentPoly<BigInt>, den_pow: &BigInt) -> Self {
        let mass = poly
            .terms()
            .map(|(k, c)| (k, BigRational::new(c.clone(), den_pow.clone())))
            .collect();
        Self { n_steps, mass }
    }
}

pub fn position_distribution(w: &StepDistribution, n: u32) -> PositionDistribution {
    let (poly, den) = w.scaled_integer_poly();
    let power = poly.pow(n);
    PositionDistribution::from_scaled(n, &power, &num_traits::pow(den, n as usize))
}

/// All position distributions for `n = 1..=max_n`, from one pass.
pub fn position_distributions(w: &StepDistribution, max_n: u32) -> Vec<PositionDistribution> {
    let (poly, den) = w.scaled_integer_poly();
    let mut den_pow = BigInt::one();
    poly.powers()
        .take(max_n as usize)
        .enumerate()
        .map(|(i, p)| {
            den_pow *= &den;
            PositionDistribution::from_scaled(i as u32 + 1, &p, &den_pow)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Exactness {
    Exact,
    /// Values are return probabilities of a truncated walk; each differs from
    /// the untruncated value by at most the matching `per_index_bound`.
    TruncatedWithBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSequence {
    /// `values[i]` is `c_{i+1}`.
    pub values: Vec<BigRational>,
    pub source: String,
    pub exactness: Exactness,
    pub per_index_bound: Option<Vec<BigRational>>,
    pub source_proper: bool,
}

impl ReturnSequence {
    /// `c_n` for `1 ≤ n ≤ len()`.
    pub fn get(&self, n: usize) -> Option<&BigRational> {
        n.checked_sub(1).and_then(|i| self.values.get(i))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Marks the sequence as coming from a truncation whose removed tail has
    /// mass `tail_mass`; the bound at index `n` is `n · tail_mass`.
    pub fn with_tail_bound(mut self, tail_mass: &BigRational) -> Self {
        let bounds = (1..=self.values.len())
            .map(|n| BigRational::from_integer(n.into()) * tail_mass)
            .collect();
        self.exactness = Exactness::TruncatedWithBound;
        self.per_index_bound = Some(bounds);
        self
    }
}

pub fn return_sequence(w: &StepDistribution, k: u32) -> ReturnSequence {
    return_sequence_cancellable(w, k, &CancelToken::new()).expect("fresh token is never cancelled")
}

/// As [`return_sequence`], checking `token` before every convolution.
pub fn return_sequence_cancellable(
    w: &StepDistribution,
    k: u32,
    token: &CancelToken,
) -> Result<ReturnSequence, Cancelled> {
    let (poly, den) = w.scaled_integer_poly();
    let mut values = Vec::with_capacity(k as usize);
    let mut power = LaurentPoly::one();
    let mut den_pow = BigInt::one();
    for _ in 0..k {
        token.check()?;
        power = power.mul(&poly);
        den_pow *= &den;
        values.push(BigRational::new(power.constant_term(), den_pow.clone()));
    }
    Ok(ReturnSequence {
        values,
        source: w.fingerprint(),
        exactness: Exactness::Exact,
        per_index_bound: None,
        source_proper: w.is_proper(),
    })
}

/// Smallest `n ≤ k` at which the two walks' return probabilities differ.
pub fn distinguishing_index(a: &StepDistribution, b: &StepDistribution, k: u32) -> Option<u32> {
    let (pa, da) = a.scaled_integer_poly();
    let (pb, db) = b.scaled_integer_poly();
    let (mut qa, mut qb) = (LaurentPoly::one(), LaurentPoly::one());
    let (mut ea, mut eb) = (BigInt::one(), BigInt::one());
    for n in 1..=k {
        qa = qa.mul(&pa);
        qb = qb.mul(&pb);
        ea *= &da;
        eb *= &db;
        // c_a = A/ea, c_b = B/eb; compare by cross-multiplication.
        if qa.constant_term() * &eb != qb.constant_term() * &ea {
            return Some(n);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticsError {
    #[error("the Chebyshev lower bound needs the step variance")]
    BoundNeedsVariance,
    #[error("diagnostics need an exact sequence from a proper walk")]
    NotExactProper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundCheck {
    /// Half-index: the check is on `c_{2n}`.
    pub n: usize,
    /// `(1 - σ²/n²) / (2n² + 1)` as `"p/q"`.
    pub bound: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub source: String,
    /// `(2n, c_{2n}^{1/(2n)})`; floating point.
    pub even_roots: Vec<(usize, f64)>,
    pub odd_all_zero: bool,
    /// Only indices with `1 - σ²/n² > 0`; the comparison is exact.
    pub lower_bound_check: Vec<LowerBoundCheck>,
}

impl GrowthReport {
    pub fn all_bounds_hold(&self) -> bool {
        self.lower_bound_check.iter().all(|c| c.holds)
    }
}

/// `c^{1/n}` in floating point, robust to values below `f64::MIN_POSITIVE`.
pub fn nth_root_f64(c: &BigRational, n: usize) -> f64 {
    if c.is_zero() {
        0.0
    } else {
        (ln_rational(c) / n as f64).exp()
    }
}

/// Exact lower bound `(1 - σ²/n²)/(2n² + 1)` on `c_{2n}`, or `None` when
/// `σ²/n² ≥ 1`.
pub fn chebyshev_lower_bound(variance: &BigRational, n: usize) -> Option<BigRational> {
    let n2 = BigRational::from_integer(BigInt::from(n) * BigInt::from(n));
    let slack = BigRational::one() - variance / &n2;
    slack
        .is_positive()
        .then(|| slack / (BigRational::from_integer(2.into()) * n2 + BigRational::one()))
}

pub fn growth_diagnostics(
    seq: &ReturnSequence,
    variance: Option<&BigRational>,
) -> Result<GrowthReport, DiagnosticsError> {
    if seq.exactness != Exactness::Exact || !seq.source_proper {
        return Err(DiagnosticsError::NotExactProper);
    }
    let variance = variance.ok_or(DiagnosticsError::BoundNeedsVariance)?;
    let k = seq.len();
    let even_roots = (1..=k / 2)
        .map(|n| (2 * n, nth_root_f64(&seq.values[2 * n - 1], 2 * n)))
        .collect();
    let odd_all_zero = seq.values.iter().step_by(2).all(Zero::is_zero);
    let lower_bound_check = (1..=k / 2)
        .filter_map(|n| {
            let bound = chebyshev_lower_bound(variance, n)?;
            let holds = seq.values[2 * n - 1] >= bound;
            Some(LowerBoundCheck {
                n,
                bound: format_rational(&bound),
                holds,
            })
        })
        .collect();
    Ok(GrowthReport {
        source: seq.source.clone(),
        even_roots,
        odd_all_zero,
        lower_bound_check,
    })
}
