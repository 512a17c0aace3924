//! Scalar abstraction shared by the floating-point and exact evaluation paths.

use alloc::string::String;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// Exact rational number used for knots and constraint matrices.
pub type Rational = BigRational;

/// Arithmetic needed by the B-spline and dual-functional kernels.
///
/// Implemented for `f64` and [`Rational`], so the same code produces
/// floating-point values for sampling and exact values for certificates.
pub trait Field: Clone + Num + PartialOrd + core::fmt::Debug {
    fn from_rational(q: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
}

impl Field for f64 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Field for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or an integer literal without passing through floating point.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => BigInt::from_str(t).ok().map(Rational::from_integer),
    }
}

/// Formats a rational as `p/q`, or as `p` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    use alloc::string::ToString;
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        alloc::format!("{}/{}", q.numer(), q.denom())
    }
}
