//! Coefficient rings used by the convolution engine.
//!
//! The same Laurent-polynomial code runs over exact integers (invariant
//! dimensions, scaled walks), exact rationals (position distributions) and
//! `f64` (the forward map inside the reconstruction solver).

use std::fmt::Debug;
use std::ops::{AddAssign, Mul};

use num_traits::{One, Zero};

/// A commutative ring element usable as a Laurent-polynomial coefficient.
pub trait Coeff: Clone + Zero + One + PartialEq + Debug + Send + Sync {
    /// `acc += a * b` without consuming the operands.
    fn mul_add_into(acc: &mut Self, a: &Self, b: &Self);
}

impl<T> Coeff for T
where
    T: Clone + Zero + One + PartialEq + Debug + Send + Sync + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    #[inline]
    fn mul_add_into(acc: &mut Self, a: &Self, b: &Self) {
        *acc += &(a * b);
    }
}
