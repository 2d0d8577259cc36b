//! Number types used throughout the crate.
//!
//! Every algorithm is generic over [`Scalar`]. [`Rational`] gives exact
//! arithmetic and is the default; `f64` is available for fast approximate
//! runs and compares with an absolute tolerance of [`FLOAT_TOLERANCE`].

use core::fmt::{Debug, Display};
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

/// Absolute tolerance used by the `f64` scalar.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + Send
    + Sync
{
    /// True when arithmetic is exact and comparisons use no tolerance.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;
    fn tolerance() -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&ratio(numer, denom))
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Strictly positive beyond tolerance.
    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    /// Strictly negative beyond tolerance.
    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        !(self.clone() - other.clone()).is_pos()
    }

    /// `self < other` beyond tolerance.
    fn lt_tol(&self, other: &Self) -> bool {
        (other.clone() - self.clone()).is_pos()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Shorthand for the exact rational `numer / denom`.
///
/// # Panics
/// Panics when `denom` is zero.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_pos(&self) -> bool {
        self.is_positive()
    }

    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    fn le_tol(&self, other: &Self) -> bool {
        self <= other
    }

    fn lt_tol(&self, other: &Self) -> bool {
        self < other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_rational(q: &Rational) -> Self {
        q.to_f64_lossy()
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        FLOAT_TOLERANCE
    }
}

trait LossyFloat {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyFloat for Rational {
    fn to_f64_lossy(&self) -> f64 {
        if let Some(v) = num_traits::ToPrimitive::to_f64(self) {
            return v;
        }
        // numerator or denominator overflow f64: scale both down first
        let n = self.numer();
        let d = self.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = (n >> shift).to_f64().unwrap_or(0.0);
        let d = (d >> shift).to_f64().unwrap_or(1.0);
        n / d
    }
}

/// Converts a whole slice between scalar types.
pub fn convert_vec<A: Scalar, B: Scalar>(v: &[A]) -> alloc::vec::Vec<B> {
    v.iter()
        .map(|x| B::from_rational(&x.to_rational()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_comparisons_are_exact() {
        let a = ratio(1, 3);
        let b = ratio(1, 3) + ratio(1, 1_000_000_000_000);
        assert!(a.lt_tol(&b));
        assert!(!b.le_tol(&a));
        assert!(a.le_tol(&a));
    }

    #[test]
    fn float_comparisons_use_tolerance() {
        let a = 1.0_f64;
        let b = 1.0 + 1e-12;
        assert!(b.le_tol(&a));
        assert!(!a.lt_tol(&b));
        assert!((1e-12_f64).is_negligible());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(alloc::format!("{}", ratio(6, -4)), "-3/2");
        assert_eq!(alloc::format!("{}", ratio(4, 2)), "2");
    }

    #[test]
    fn huge_rational_to_float() {
        let big = BigInt::from(10).pow(400u32);
        let q = Rational::new(big.clone() * BigInt::from(3), big);
        assert!((Scalar::to_f64(&q) - 3.0).abs() < 1e-12);
    }
}
