//! Field abstraction shared by the exact and floating-point code paths.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Ratio = num_rational::BigRational;

/// Tolerance used by [`Scalar::near`] for floating-point values.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Numbers the analyses can run on.
///
/// Exact types compare with `==`; `f64` compares within [`FLOAT_TOLERANCE`].
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_exact(value: &Ratio) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality up to the type's notion of precision.
    fn near(&self, other: &Self) -> bool;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    /// Rescales `v` in place so it sums to one and returns the log of the
    /// removed factor. Exact types leave `v` untouched and return `0`.
    fn rescale(v: &mut [Self]) -> f64;

    /// `self * exp(log_factor)`; exact types only ever see `log_factor == 0`.
    fn scale_by_exp(&self, log_factor: f64) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_exact(value: &Ratio) -> Self {
        Scalar::to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn near(&self, other: &Self) -> bool {
        Float::abs(self - other) <= FLOAT_TOLERANCE * Float::max(1.0, Float::abs(*self))
    }

    fn rescale(v: &mut [Self]) -> f64 {
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            for x in v.iter_mut() {
                *x /= total;
            }
            Float::ln(total)
        } else {
            0.0
        }
    }

    fn scale_by_exp(&self, log_factor: f64) -> Self {
        if log_factor == 0.0 {
            *self
        } else {
            self * Float::exp(log_factor)
        }
    }
}

impl Scalar for Ratio {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_exact(value: &Ratio) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn near(&self, other: &Self) -> bool {
        self == other
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn rescale(_v: &mut [Self]) -> f64 {
        0.0
    }

    fn scale_by_exp(&self, log_factor: f64) -> Self {
        debug_assert!(log_factor == 0.0);
        self.clone()
    }
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(values: &[S]) -> S {
    values.iter().cloned().fold(S::zero(), |acc, x| acc + x)
}

/// Shorthand for an exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Ratio {
    Ratio::from_ratio(num, den)
}

/// Parses `"3"`, `"1/3"`, `"-2/5"` or a finite decimal such as `"0.125"`
/// into an exact rational.
pub fn parse_ratio(text: &str) -> Option<Ratio> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Ratio::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut digits = alloc::string::String::from(int_part);
    digits.push_str(frac_part);
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = Ratio::new(num, den);
    Some(if negative { -value } else { value })
}

/// Converts an exact value to the target scalar type.
pub fn convert<S: Scalar>(value: &Ratio) -> S {
    S::from_exact(value)
}
