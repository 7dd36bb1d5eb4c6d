//! Finite Laurent polynomials `Σ c_k t^k` over a generic coefficient ring.

use std::fmt;

use crate::scalar::Coeff;

/// A Laurent polynomial with finitely many nonzero coefficients.
///
/// Stored densely from the lowest to the highest nonzero exponent. Zero
/// coefficients in between are kept but skipped during multiplication, so
/// sparse supports (dilated walks) cost no more than their nonzero count.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<T> {
    low: i64,
    coeffs: Vec<T>,
}

impl<T: Coeff> LaurentPoly<T> {
    pub fn zero() -> Self {
        Self {
            low: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, T::one())
    }

    pub fn monomial(exp: i64, coeff: T) -> Self {
        Self {
            low: exp,
            coeffs: vec![coeff],
        }
        .trimmed()
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, T)>,
    {
        let terms: Vec<(i64, T)> = terms.into_iter().collect();
        let Some(low) = terms.iter().map(|(e, _)| *e).min() else {
            return Self::zero();
        };
        let high = terms.iter().map(|(e, _)| *e).max().unwrap_or(low);
        let mut coeffs = vec![T::zero(); (high - low + 1) as usize];
        for (e, c) in terms {
            let slot = &mut coeffs[(e - low) as usize];
            T::mul_add_into(slot, &c, &T::one());
        }
        Self { low, coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        let Some(first) = self.coeffs.iter().position(|c| !c.is_zero()) else {
            return Self::zero();
        };
        let last = self
            .coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(first);
        self.coeffs.truncate(last + 1);
        self.coeffs.drain(..first);
        self.low += first as i64;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn low(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.low)
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn high(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.low + self.coeffs.len() as i64 - 1)
    }

    pub fn coeff(&self, exp: i64) -> T {
        self.coeff_ref(exp).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeff_ref(&self, exp: i64) -> Option<&T> {
        let idx = exp.checked_sub(self.low)?;
        if idx < 0 {
            return None;
        }
        self.coeffs.get(idx as usize)
    }

    pub fn constant_term(&self) -> T {
        self.coeff(0)
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn coeff_sum(&self) -> T {
        let mut acc = T::zero();
        for (_, c) in self.terms() {
            T::mul_add_into(&mut acc, c, &T::one());
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // Iterate the sparser operand in the inner loop.
        let (outer, inner) = if self.nonzero_count() >= other.nonzero_count() {
            (self, other)
        } else {
            (other, self)
        };
        let inner_terms: Vec<(usize, &T)> = inner
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let mut out = vec![T::zero(); outer.coeffs.len() + inner.coeffs.len() - 1];
        for (i, a) in outer.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &(j, b) in &inner_terms {
                T::mul_add_into(&mut out[i + j], a, b);
            }
        }
        Self {
            low: self.low + other.low,
            coeffs: out,
        }
        .trimmed()
    }

    /// `self^n` by square-and-multiply.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Successive powers `self^1, self^2, ...`, one multiplication each.
    pub fn powers(&self) -> Powers<'_, T> {
        Powers {
            base: self,
            current: Self::one(),
        }
    }

    /// Applies `f` coefficientwise, e.g. to change rings.
    pub fn map<U: Coeff>(&self, mut f: impl FnMut(&T) -> U) -> LaurentPoly<U> {
        LaurentPoly {
            low: self.low,
            coeffs: self.coeffs.iter().map(&mut f).collect(),
        }
        .trimmed()
    }

    fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

impl<T: Coeff> Default for LaurentPoly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coeff + fmt::Display> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})t^{e}")?;
        }
        Ok(())
    }
}

pub struct Powers<'a, T> {
    base: &'a LaurentPoly<T>,
    current: LaurentPoly<T>,
}

impl<T: Coeff> Iterator for Powers<'_, T> {
    type Item = LaurentPoly<T>;

    fn next(&mut self) -> Option<Self::Item> {
        self.current = self.current.mul(self.base);
        Some(self.current.clone())
    }
}
