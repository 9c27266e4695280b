//! Coefficient types shared by the exact (rational) and floating oracles.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Debug + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    /// Builds a coefficient from a probability given both exactly and as a float.
    fn from_prob(exact: &BigRational, approx: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// `|self - other| <= tol`, exact equality for rationals when `tol == 0`.
    fn close_to(&self, other: &Self, tol: f64) -> bool;
}

impl Scalar for f64 {
    fn from_prob(_exact: &BigRational, approx: f64) -> f64 {
        approx
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn close_to(&self, other: &f64, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

impl Scalar for BigRational {
    fn from_prob(exact: &BigRational, _approx: f64) -> BigRational {
        exact.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn close_to(&self, other: &BigRational, tol: f64) -> bool {
        if tol == 0.0 {
            self == other
        } else {
            ratio_to_f64(&(self - other).abs()) <= tol
        }
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale down huge numerators/denominators before dividing.
    let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Parses `"p/q"`, an integer, or a decimal literal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Some(if negative { -r } else { r });
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(n))
}
