//! Step distributions of walks on the integer lattice, their classification,
//! and the dilation/contraction pair that leaves return probabilities alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::rational::{common_denominator, format_rational, gcd_all, to_f64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("negative probability at step {0}")]
    NegativeProbability(i64),
    #[error("total mass {0} exceeds one")]
    MassExceedsOne(String),
    #[error("step {0} listed more than once")]
    DuplicateStep(i64),
    #[error("walk has no step with positive probability")]
    EmptySupport,
    #[error("walk has no nonzero step")]
    NoNonzeroStep,
    #[error("geometric tail parameters are not normalizable: {0}")]
    ParametersNotNormalizable(&'static str),
}

/// A finitely supported probability (or subprobability) on integer steps.
///
/// Only positive masses are stored. `total` is the exact sum and the walk is
/// proper exactly when it equals one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StepDistribution {
    mass: BTreeMap<i64, BigRational>,
    total: BigRational,
}

impl StepDistribution {
    /// Validates `(step, probability)` pairs. Zero entries are dropped before
    /// the duplicate check.
    pub fn new<I>(entries: I) -> Result<Self, WalkError>
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let mut mass = BTreeMap::new();
        for (step, prob) in entries {
            if prob.is_negative() {
                return Err(WalkError::NegativeProbability(step));
            }
            if prob.is_zero() {
                continue;
            }
            if mass.insert(step, prob).is_some() {
                return Err(WalkError::DuplicateStep(step));
            }
        }
        Self::from_mass(mass)
    }

    fn from_mass(mass: BTreeMap<i64, BigRational>) -> Result<Self, WalkError> {
        if mass.is_empty() {
            return Err(WalkError::EmptySupport);
        }
        let total: BigRational = mass.values().sum();
        if total > BigRational::one() {
            return Err(WalkError::MassExceedsOne(format_rational(&total)));
        }
        Ok(Self { mass, total })
    }

    /// Convenience constructor from small integer fractions `(step, num, den)`.
    pub fn from_fractions(entries: &[(i64, i64, i64)]) -> Result<Self, WalkError> {
        Self::new(
            entries
                .iter()
                .map(|&(s, n, d)| (s, BigRational::new(n.into(), d.into()))),
        )
    }

    /// Symmetric walk from its half-line masses `a_0, a_1, ..., a_m`.
    pub fn symmetric(half: &[BigRational]) -> Result<Self, WalkError> {
        let mut entries = Vec::with_capacity(2 * half.len());
        for (k, a) in half.iter().enumerate() {
            let k = k as i64;
            entries.push((k, a.clone()));
            if k > 0 {
                entries.push((-k, a.clone()));
            }
        }
        Self::new(entries)
    }

    pub fn mass(&self, step: i64) -> BigRational {
        self.mass
            .get(&step)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Nonzero `(step, mass)` pairs in ascending step order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, &BigRational)> + '_ {
        self.mass.iter().map(|(s, p)| (*s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.mass.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> &BigRational {
        &self.total
    }

    pub fn is_proper(&self) -> bool {
        self.total.is_one()
    }

    /// Largest step size `max |n|` over the support.
    pub fn max_step(&self) -> u64 {
        self.support().map(i64::unsigned_abs).max().unwrap_or(0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(s, p)| self.mass.get(&-s) == Some(p))
    }

    /// Generating Laurent polynomial `Σ a_k t^k`.
    pub fn to_poly(&self) -> LaurentPoly<BigRational> {
        LaurentPoly::from_terms(self.entries().map(|(s, p)| (s, p.clone())))
    }

    /// `(D · Σ a_k t^k, D)` with `D` the least common denominator, so that
    /// powers can be taken in integer arithmetic.
    pub fn scaled_integer_poly(&self) -> (LaurentPoly<BigInt>, BigInt) {
        let den = common_denominator(self.mass.values());
        let poly =
            LaurentPoly::from_terms(self.entries().map(|(s, p)| (s, (p * &den).to_integer())));
        (poly, den)
    }

    pub fn float_entries(&self) -> Vec<(i64, f64)> {
        self.entries().map(|(s, p)| (s, to_f64(p))).collect()
    }

    /// Short content hash used to tag derived sequences.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (s, p) in self.entries() {
            hasher.update(format!("{s}:{};", format_rational(p)).as_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl fmt::Debug for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries().map(|(s, p)| (s, format_rational(p))))
            .finish()
    }
}

impl fmt::Display for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (s, p)) in self.entries().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}: {p}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum WalkType {
    /// Some even step size (zero included).
    Type1,
    /// Every step size odd.
    Type2,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct WalkClass {
    pub symmetric: bool,
    pub primitive: bool,
    pub proper: bool,
    pub walk_type: WalkType,
    pub step_sizes: BTreeSet<u64>,
    pub gcd_nonzero_steps: u64,
}

impl WalkClass {
    pub fn is_classifiable(&self) -> bool {
        self.walk_type != WalkType::NotApplicable
    }
}

pub fn classify(w: &StepDistribution) -> WalkClass {
    let step_sizes: BTreeSet<u64> = w.support().map(i64::unsigned_abs).collect();
    let gcd_nonzero_steps = gcd_all(w.support());
    let symmetric = w.is_symmetric();
    let primitive = gcd_nonzero_steps == 1;
    let proper = w.is_proper();
    let walk_type = if symmetric && primitive && proper {
        if step_sizes.iter().any(|s| s % 2 == 0) {
            WalkType::Type1
        } else {
            WalkType::Type2
        }
    } else {
        WalkType::NotApplicable
    };
    WalkClass {
        symmetric,
        primitive,
        proper,
        walk_type,
        step_sizes,
        gcd_nonzero_steps,
    }
}

/// Moves the mass at step `n` to step `c·n`.
///
/// # Panics
///
/// If `c` is zero.
pub fn dilate(w: &StepDistribution, c: u64) -> StepDistribution {
    assert!(c > 0, "dilation factor must be positive");
    let c = i64::try_from(c).expect("dilation factor fits in i64");
    let mass = w.entries().map(|(s, p)| (s * c, p.clone())).collect();
    StepDistribution {
        mass,
        total: w.total.clone(),
    }
}

/// Divides every step by the gcd of the nonzero steps, returning the
/// contracted walk and that gcd.
pub fn contract(w: &StepDistribution) -> Result<(StepDistribution, u64), WalkError> {
    let c = gcd_all(w.support());
    if c == 0 {
        return Err(WalkError::NoNonzeroStep);
    }
    let ci = c as i64;
    let mass = w.entries().map(|(s, p)| (s / ci, p.clone())).collect();
    Ok((
        StepDistribution {
            mass,
            total: w.total.clone(),
        },
        c,
    ))
}

/// Truncation at `|k| ≤ m` of the symmetric walk with `a_0 = center_mass`
/// and `a_{±k} ∝ ratio^k` for `k ≥ 1`, normalized to total mass one before
/// truncating. Returns the subprobability walk and the removed tail mass
/// `Pr[|x_1| > m] = (1 - center_mass) · ratio^m`.
pub fn truncate_geometric(
    ratio: &BigRational,
    center_mass: &BigRational,
    m: u32,
) -> Result<(StepDistribution, BigRational), WalkError> {
    let one = BigRational::one();
    if !ratio.is_positive() || *ratio >= one {
        return Err(WalkError::ParametersNotNormalizable(
            "ratio must lie in (0, 1)",
        ));
    }
    if center_mass.is_negative() || *center_mass >= one {
        return Err(WalkError::ParametersNotNormalizable(
            "center mass must lie in [0, 1) to leave room for the tail",
        ));
    }
    if m == 0 {
        return Err(WalkError::ParametersNotNormalizable(
            "truncation radius must be positive",
        ));
    }
    let budget = &one - center_mass;
    // 2 · scale · Σ_{k≥1} ratio^k = budget
    let scale = &budget * (&one - ratio) / (BigRational::from_integer(2.into()) * ratio);
    let mut entries = Vec::with_capacity(2 * m as usize + 1);
    entries.push((0, center_mass.clone()));
    let mut power = ratio.clone();
    for k in 1..=i64::from(m) {
        let a = &scale * &power;
        entries.push((k, a.clone()));
        entries.push((-k, a));
        power *= ratio;
    }
    let tail = &budget * num_traits::pow(ratio.clone(), m as usize);
    let walk = StepDistribution::new(entries)?;
    Ok((walk, tail))
}
