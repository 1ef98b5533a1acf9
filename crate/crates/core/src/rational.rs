//! Exact rational numbers and the float boundary.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Shorthand for `n/d`.
pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3/4"`, `"1"` or `"-2/5"`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    if t.contains('/') {
        let (n, d) = t.split_once('/').unwrap();
        let n = BigInt::from_str(n.trim()).map_err(|_| format!("bad numerator in {s:?}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rational::new(n, d))
    } else {
        BigInt::from_str(t)
            .map(Rational::from_integer)
            .map_err(|_| format!("{s:?} is not a rational literal (expected e.g. \"3/4\")"))
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale through the bit lengths
        let (n, d) = (x.numer(), x.denom());
        let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
        let n = (n >> shift).to_f64().unwrap_or(0.0);
        let d = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}

/// Neumaier-compensated sum in the given order; deterministic for a fixed
/// input sequence.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), r(3, 4));
        assert_eq!(parse_rational("1").unwrap(), r(1, 1));
        assert!(parse_rational("0.25").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn float_boundary() {
        assert_eq!(to_f64(&r(1, 4)), 0.25);
        let tiny = Rational::new(BigInt::from(1), BigInt::from(3).pow(700));
        assert!(to_f64(&tiny) >= 0.0);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let terms = [1.0, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(terms) - 2e-16).abs() < 1e-30);
    }
}
