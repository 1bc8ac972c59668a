//! Exact rational arithmetic over 128-bit integers.
//!
//! Frequencies, cohesions and thresholds are all exact fractions. The truss
//! condition is a strict inequality, so borderline comparisons must never be
//! decided by floating-point rounding. Arithmetic that overflows i128 panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    // always > 0, gcd(|num|, den) == 1
    den: i128,
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let num = num.checked_mul(sign).expect("rational overflow");
        let den = den.checked_mul(sign).expect("rational overflow");
        if num == 0 {
            return Rational { num: 0, den: 1 };
        }
        let g = gcd(num, den);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    pub const fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub const fn one() -> Self {
        Rational { num: 1, den: 1 }
    }

    pub fn from_int(v: i128) -> Self {
        Rational { num: v, den: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Exact decimal string when the denominator is of the form 2^a * 5^b,
    /// otherwise the `num/den` fraction form. Both forms parse back to the
    /// identical value.
    pub fn to_decimal_string(&self) -> String {
        if self.den == 1 {
            return self.num.to_string();
        }
        let mut d = self.den;
        let mut twos = 0u32;
        let mut fives = 0u32;
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        if d != 1 {
            return format!("{}/{}", self.num, self.den);
        }
        let digits = twos.max(fives);
        let scale = 10i128
            .checked_pow(digits)
            .and_then(|p| p.checked_div(self.den))
            .expect("rational overflow");
        let scaled = match self.num.checked_mul(scale) {
            Some(v) => v,
            None => return format!("{}/{}", self.num, self.den),
        };
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.unsigned_abs();
        let pow = 10u128.pow(digits);
        format!(
            "{}{}.{:0width$}",
            sign,
            abs / pow,
            abs % pow,
            width = digits as usize
        )
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        let num = self
            .num
            .checked_mul(rhs.den)
            .and_then(|a| rhs.num.checked_mul(self.den).and_then(|b| a.checked_add(b)))
            .expect("rational overflow");
        let den = self.den.checked_mul(rhs.den).expect("rational overflow");
        Rational::new(num, den)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        let num = self
            .num
            .checked_mul(rhs.den)
            .and_then(|a| rhs.num.checked_mul(self.den).and_then(|b| a.checked_sub(b)))
            .expect("rational overflow");
        let den = self.den.checked_mul(rhs.den).expect("rational overflow");
        Rational::new(num, den)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        let num = self.num.checked_mul(rhs.num).expect("rational overflow");
        let den = self.den.checked_mul(rhs.den).expect("rational overflow");
        Rational::new(num, den)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num.checked_mul(other.den).expect("rational overflow");
        let rhs = other.num.checked_mul(self.den).expect("rational overflow");
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational: {0}")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `a/b` fractions, decimals (`0.25`, parsed exactly as
    /// 25/100) and plain integers. Binary floating point is never involved.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseRationalError(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let num: i128 = n.trim().parse().map_err(|_| bad())?;
            let den: i128 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(num, den));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.starts_with('-');
            let int_part: i128 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let frac_part: i128 = frac.parse().map_err(|_| bad())?;
            let scale = 10i128
                .checked_pow(frac.len() as u32)
                .ok_or_else(bad)?;
            let magnitude = int_part
                .checked_abs()
                .and_then(|i| i.checked_mul(scale))
                .and_then(|i| i.checked_add(frac_part))
                .ok_or_else(bad)?;
            let num = if neg || int_part < 0 { -magnitude } else { magnitude };
            return Ok(Rational::new(num, scale));
        }
        let v: i128 = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_int(v))
    }
}
