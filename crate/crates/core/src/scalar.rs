//! Floating-point scalar abstraction shared by every algorithm in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point type the equilibration routines are generic over.
///
/// Implemented for `f32` and `f64`. The iterations take reciprocals and square
/// roots of small quantities, so `f64` is the type used by the I/O, corpus and
/// experiment layers.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + FromStr
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        // f32/f64 conversions from f64 never fail (out-of-range becomes inf)
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossless-or-rounded conversion to `f64`, used by diagnostics.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + FromStr
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Sum of the entries of a (nonnegative) vector, i.e. its 1-norm.
#[inline]
pub(crate) fn sum<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum()
}

#[cfg(test)]
pub(crate) fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).map(|(&a, &b)| a * b).sum()
}

pub(crate) fn first_nonpositive<T: Scalar>(v: &[T]) -> Option<usize> {
    v.iter().position(|x| !(x.is_finite() && *x > T::zero()))
}
