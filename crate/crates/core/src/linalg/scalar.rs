//! Integer backends for the elimination kernels.
//!
//! Kernels are written once against [`Scalar`]. Fixed-width backends report
//! overflow by returning `None`, at which point the caller reruns the kernel
//! on `BigInt`. The big backend never fails.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub(crate) trait Scalar: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn cmp_abs(&self, other: &Self) -> Ordering;
    fn checked_neg(&self) -> Option<Self>;
    /// `self - q * b`
    fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self>;
    /// `(self * a - b * c) / d`, the division being exact.
    fn bareiss(&self, a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self>;
    /// Quotient rounded to the nearest integer, so the remainder is at most half of `|d|`.
    fn nearest_quotient(&self, d: &Self) -> Self;
    fn divides(&self, other: &Self) -> bool;
}

// `MIN` is treated as overflow so that negation and `abs` stay total.
macro_rules! fixed_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_big(v: &BigInt) -> Option<Self> {
                <$t>::try_from(v.clone()).ok().filter(|x| *x != <$t>::MIN)
            }
            fn to_big(&self) -> BigInt {
                BigInt::from(*self)
            }
            fn zero() -> Self {
                0
            }
            fn one() -> Self {
                1
            }
            fn is_zero(&self) -> bool {
                *self == 0
            }
            fn is_negative(&self) -> bool {
                *self < 0
            }
            fn cmp_abs(&self, other: &Self) -> Ordering {
                self.unsigned_abs().cmp(&other.unsigned_abs())
            }
            fn checked_neg(&self) -> Option<Self> {
                Some(-*self)
            }
            fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
                <$t>::checked_sub(*self, <$t>::checked_mul(*q, *b)?).filter(|x| *x != <$t>::MIN)
            }
            fn bareiss(&self, a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
                let num = <$t>::checked_sub(<$t>::checked_mul(*self, *a)?, <$t>::checked_mul(*b, *c)?)?;
                debug_assert_eq!(num % d, 0);
                num.checked_div(*d).filter(|x| *x != <$t>::MIN)
            }
            fn nearest_quotient(&self, d: &Self) -> Self {
                let mut q = self.div_euclid(*d);
                let r = self.rem_euclid(*d);
                if r > d.abs() - r {
                    q += d.signum();
                }
                q
            }
            fn divides(&self, other: &Self) -> bool {
                if *self == 0 {
                    *other == 0
                } else {
                    other % self == 0
                }
            }
        }
    };
}

fixed_scalar!(i64);
fixed_scalar!(i128);

impl Scalar for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.sign() == Sign::Minus
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.magnitude().cmp(other.magnitude())
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn checked_sub_mul(&self, q: &Self, b: &Self) -> Option<Self> {
        Some(self - q * b)
    }
    fn bareiss(&self, a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        let num = self * a - b * c;
        debug_assert!(Zero::is_zero(&(&num % d)));
        Some(num / d)
    }
    fn nearest_quotient(&self, d: &Self) -> Self {
        // floor division leaves r between 0 and d; q + 1 leaves r - d
        let (mut q, r) = self.div_mod_floor(d);
        if r.abs() * 2u32 > d.abs() {
            q += 1;
        }
        q
    }
    fn divides(&self, other: &Self) -> bool {
        if Zero::is_zero(self) {
            Zero::is_zero(other)
        } else {
            Zero::is_zero(&(other % self))
        }
    }
}
