//! Probability scalars: exact rationals or `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse probability {0:?}")]
pub struct ParseProbabilityError(pub String);

/// Scalar type for channel probabilities.
pub trait Probability:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + 'static
{
    /// Whether probabilities are compared exactly.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn parse(s: &str) -> Result<Self, ParseProbabilityError>;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn ipow(&self, e: u64) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    /// Equality up to the tolerance of the representation.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }
}

impl Probability for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(s: &str) -> Result<Self, ParseProbabilityError> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| ParseProbabilityError(s.into()))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| ParseProbabilityError(s.into()))?;
            return Ok(n / d);
        }
        s.parse().map_err(|_| ParseProbabilityError(s.into()))
    }
}

impl Probability for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    /// Accepts integers, fractions `a/b` and decimals such as `0.992`, all exactly.
    fn parse(s: &str) -> Result<Self, ParseProbabilityError> {
        let err = || ParseProbabilityError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(BigRational::new(n, d));
        }
        let (mantissa, exponent) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (t, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let num = BigInt::from_str(&digits).map_err(|_| err())?;
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10);
        Ok(if scale >= 0 {
            BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
        })
    }
}
