//! Exact rational helpers shared by the geometric and folding code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// `n / d` as a [`Rational`].
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a [`Rational`].
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Formats as `"p/q"` in lowest terms, always with a denominator.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Nearest binary64 value.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// The exact value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

/// `x` is an integer multiple of `unit` (`unit > 0`).
pub fn is_multiple_of(x: &Rational, unit: &Rational) -> bool {
    (x / unit).is_integer()
}

/// Floor as a big integer.
pub fn floor_int(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Ceiling as a big integer.
pub fn ceil_int(x: &Rational) -> BigInt {
    x.numer().div_ceil(x.denom())
}

/// `x^k` for small non-negative `k`.
pub fn pow(x: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// Exact accumulator for sums of finite floats.
///
/// Every finite `f64` is an integer multiple of `2^-1074`, so the running sum
/// is kept as a big integer in those units.
#[derive(Clone, Debug, Default)]
pub struct DyadicSum {
    acc: BigInt,
}

const DYADIC_SHIFT: i32 = 1075;

impl DyadicSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        debug_assert!(x.is_finite());
        let (mantissa, exponent, sign) = x.integer_decode();
        if mantissa == 0 {
            return;
        }
        let term = BigInt::from(mantissa) << ((exponent as i32 + DYADIC_SHIFT) as usize);
        if sign < 0 {
            self.acc -= term;
        } else {
            self.acc += term;
        }
    }

    pub fn value(&self) -> Rational {
        Rational::new(self.acc.clone(), BigInt::one() << DYADIC_SHIFT as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let x = parse_rational("6/8").unwrap();
        assert_eq!(format_rational(&x), "3/4");
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(format_rational(&int(-2)), "-2/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn dyadic_sum_is_exact() {
        let mut s = DyadicSum::new();
        for x in [0.1, 0.2, -0.3, 1e-300, f64::MIN_POSITIVE / 4.0] {
            s.add(x);
        }
        let mut expect = Rational::zero();
        for x in [0.1, 0.2, -0.3, 1e-300, f64::MIN_POSITIVE / 4.0] {
            expect += from_f64(x).unwrap();
        }
        assert_eq!(s.value(), expect);
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_int(&rat(-7, 2)), BigInt::from(-4));
        assert_eq!(ceil_int(&rat(-7, 2)), BigInt::from(-3));
        assert_eq!(ceil_int(&rat(8, 2)), BigInt::from(4));
    }
}
